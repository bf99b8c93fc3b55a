//! Binary checkpoints, little-endian throughout:
//!
//! ```text
//! b"SMDL"                 magic
//! u32                     format version (1)
//! u32 x 3                 nx, ny, nz
//! f64 x 8                 L, U, nu, delta, c_s, kappa, Re, gamma
//! f64                     simulation time
//! f64 x nx*ny*nz          u
//! f64 x nx*ny*nz          v
//! f64 x nx*ny*(nz+1)      w
//! f64 x nx*ny*nz          p
//! ```
//!
//! Arrays are stored with `x` fastest and `z` slowest.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::domain::{DomainParams, Grid};
use crate::error::{Error, Result};
use crate::field::VelocityField;

pub const MAGIC: &[u8; 4] = b"SMDL";
pub const VERSION: u32 = 1;

pub fn write_checkpoint(path: impl AsRef<Path>, field: &VelocityField, domain: &DomainParams) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    encode(&mut out, field, domain)?;
    out.flush()?;
    Ok(())
}

pub fn encode<W: Write>(out: &mut W, field: &VelocityField, domain: &DomainParams) -> Result<()> {
    let g = field.grid();
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    for n in [g.nx, g.ny, g.nz] {
        let n = u32::try_from(n).map_err(|_| Error::Checkpoint(format!("grid dimension {n} exceeds u32")))?;
        out.write_all(&n.to_le_bytes())?;
    }
    let params = [
        domain.length(),
        domain.lid_speed(),
        domain.viscosity(),
        domain.delta(),
        domain.c_s(),
        domain.kappa(),
        domain.re(),
        domain.gamma(),
        field.time,
    ];
    for x in params.iter().chain(&field.u).chain(&field.v).chain(&field.w).chain(&field.p) {
        out.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<(VelocityField, DomainParams)> {
    decode(&mut BufReader::new(File::open(path)?))
}

pub fn decode<R: Read>(input: &mut R) -> Result<(VelocityField, DomainParams)> {
    let truncated = |e: std::io::Error| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Checkpoint("file is truncated".into())
        } else {
            Error::Io(e)
        }
    };
    let mut word = [0u8; 4];
    input.read_exact(&mut word).map_err(truncated)?;
    if &word != MAGIC {
        return Err(Error::Checkpoint("missing SMDL magic".into()));
    }
    let mut read_u32 = |input: &mut R| -> Result<u32> {
        input.read_exact(&mut word).map_err(truncated)?;
        Ok(u32::from_le_bytes(word))
    };
    let version = read_u32(input)?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported format version {version}")));
    }
    let dims = [read_u32(input)?, read_u32(input)?, read_u32(input)?].map(|n| n as usize);
    let mut read_f64s = |n: usize| -> Result<Vec<f64>> {
        let mut bytes = vec![0u8; 8 * n];
        input.read_exact(&mut bytes).map_err(truncated)?;
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect())
    };
    let p = read_f64s(9)?;
    let base = DomainParams::new(p[0], if p[1] == 0.0 { 1.0 } else { p[1] }, p[2], p[3], p[4], p[5])
        .map_err(|e| Error::Checkpoint(format!("stored parameters invalid: {e}")))?;
    let domain = if p[1] == 0.0 { base.with_lid_speed(0.0)? } else { base };
    let consistent = |a: f64, b: f64| a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    if !consistent(domain.re(), p[6]) || !(consistent(domain.gamma(), p[7]) || p[7].is_infinite()) {
        return Err(Error::Checkpoint("stored Re/gamma disagree with the stored parameters".into()));
    }
    let grid = Grid::new(&domain, dims[0], dims[1], dims[2])
        .map_err(|e| Error::Checkpoint(format!("stored grid invalid: {e}")))?;
    let mut field = VelocityField::zeros(&grid, domain.lid_speed());
    field.time = p[8];
    let n = grid.cells();
    field.u = read_f64s(n)?;
    field.v = read_f64s(n)?;
    field.w = read_f64s(grid.nx * grid.ny * (grid.nz + 1))?;
    field.p = read_f64s(n)?;
    Ok((field, domain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::make_domain;

    #[test]
    fn round_trip() {
        let d = make_domain(1.0, 1.0, 0.01, 0.1, 0.1, 1.0).unwrap();
        let g = Grid::new(&d, 4, 5, 6).unwrap();
        let mut f = VelocityField::couette(&d, &g);
        f.time = 1.25;
        f.p.iter_mut().enumerate().for_each(|(n, p)| *p = n as f64);
        let mut buf = Vec::new();
        encode(&mut buf, &f, &d).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 12 + 9 * 8 + 8 * (3 * 120 + 4 * 5 * 7));
        let (back, dd) = decode(&mut buf.as_slice()).unwrap();
        assert_eq!(back, f);
        assert_eq!(dd, d);

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&mut bad.as_slice()), Err(Error::Checkpoint(_))));
        assert!(matches!(decode(&mut &buf[..100]), Err(Error::Checkpoint(_))));
    }
}
