//! WGF1 gauge-configuration files.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! "WGF1"              4 bytes
//! d                   u32
//! sides[d]            u32 × d
//! family              u8   (0 = U, 1 = SU)
//! N                   u32
//! beta                f64
//! seed                u64
//! sweeps_done         u64
//! links               for each bond (x, μ) in lexicographic order:
//!                     N² × (f64 re, f64 im), row-major
//! ```

use std::io::{self, Read, Write};

use num_complex::Complex;
use thiserror::Error;

use super::{ConfigMeta, GaugeConfig};
use crate::group::{Family, GroupElement, GroupKind};
use crate::lattice::LatticeGeometry;
use crate::linalg::CMatrix;
use crate::num::Real;

pub const WGF_MAGIC: &[u8; 4] = b"WGF1";

#[derive(Debug, Error)]
pub enum WgfError {
    #[error("not a WGF1 file")]
    NotWgf,
    #[error("truncated WGF1 file")]
    Truncated,
    #[error("invalid WGF1 header: {0}")]
    Header(String),
    #[error("trailing bytes after WGF1 payload")]
    Trailing,
    #[error(transparent)]
    Io(io::Error),
}

impl From<io::Error> for WgfError {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            WgfError::Truncated
        } else {
            WgfError::Io(e)
        }
    }
}

pub fn write_wgf<T: Real, W: Write>(cfg: &GaugeConfig<T>, mut w: W) -> io::Result<()> {
    let torus = cfg.torus();
    let kind = cfg.kind();
    let meta = cfg.meta();
    w.write_all(WGF_MAGIC)?;
    w.write_all(&(torus.d() as u32).to_le_bytes())?;
    for &s in torus.sides() {
        w.write_all(&(s as u32).to_le_bytes())?;
    }
    w.write_all(&[match kind.family {
        Family::U => 0u8,
        Family::SU => 1u8,
    }])?;
    w.write_all(&(kind.n as u32).to_le_bytes())?;
    w.write_all(&meta.beta.to_le_bytes())?;
    w.write_all(&meta.seed.to_le_bytes())?;
    w.write_all(&meta.sweeps_done.to_le_bytes())?;
    let mut buf = Vec::with_capacity(cfg.links().len() * kind.n * kind.n * 16);
    for u in cfg.links() {
        for z in u.matrix().as_slice() {
            buf.extend_from_slice(&z.re.as_f64().to_le_bytes());
            buf.extend_from_slice(&z.im.as_f64().to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    w.flush()
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, WgfError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, WgfError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64, WgfError> {
    Ok(f64::from_bits(read_u64(r)?))
}

pub fn read_wgf<T: Real, R: Read>(mut r: R) -> Result<GaugeConfig<T>, WgfError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| WgfError::NotWgf)?;
    if &magic != WGF_MAGIC {
        return Err(WgfError::NotWgf);
    }
    let d = read_u32(&mut r)? as usize;
    if !(2..=8).contains(&d) {
        return Err(WgfError::Header(format!("unsupported dimension {d}")));
    }
    let sides = (0..d)
        .map(|_| read_u32(&mut r).map(|s| s as usize))
        .collect::<Result<Vec<_>, _>>()?;
    let torus = LatticeGeometry::new(sides, vec![0; d]).map_err(|e| WgfError::Header(e.to_string()))?;
    let mut fam = [0u8; 1];
    r.read_exact(&mut fam)?;
    let family = match fam[0] {
        0 => Family::U,
        1 => Family::SU,
        other => return Err(WgfError::Header(format!("unknown group family byte {other}"))),
    };
    let n = read_u32(&mut r)? as usize;
    let kind = GroupKind::new(family, n).map_err(|e| WgfError::Header(e.to_string()))?;
    let meta = ConfigMeta {
        beta: read_f64(&mut r)?,
        seed: read_u64(&mut r)?,
        sweeps_done: read_u64(&mut r)?,
    };
    let bonds = torus.volume() * d;
    let mut payload = vec![0u8; bonds * n * n * 16];
    r.read_exact(&mut payload)?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(WgfError::Trailing);
    }
    let mut words = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let links = (0..bonds)
        .map(|_| {
            let data = (0..n * n)
                .map(|_| {
                    let re = words.next().expect("payload sized by header");
                    let im = words.next().expect("payload sized by header");
                    Complex::new(T::of(re), T::of(im))
                })
                .collect();
            GroupElement::from_matrix(CMatrix::from_row_major(n, data))
        })
        .collect();
    GaugeConfig::from_links(torus, kind, links, meta).map_err(|e| WgfError::Header(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::{sample_configurations, SamplerPlan};

    fn sample() -> GaugeConfig<f64> {
        let mut plan = SamplerPlan::new(0.02, 9);
        plan.n_therm = 2;
        sample_configurations(
            &plan,
            LatticeGeometry::new(vec![3, 4], vec![0, 0]).unwrap(),
            GroupKind::SU2,
        )
        .unwrap()
        .remove(0)
    }

    #[test]
    fn round_trip_is_exact() {
        let cfg = sample();
        let mut bytes = Vec::new();
        write_wgf(&cfg, &mut bytes).unwrap();
        let expected_len = 4 + 4 + 2 * 4 + 1 + 4 + 8 + 8 + 8 + 24 * 4 * 16;
        assert_eq!(bytes.len(), expected_len);
        let back: GaugeConfig<f64> = read_wgf(bytes.as_slice()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn header_layout() {
        let cfg = sample();
        let mut bytes = Vec::new();
        write_wgf(&cfg, &mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"WGF1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 4);
        assert_eq!(bytes[16], 1);
        assert_eq!(u32::from_le_bytes(bytes[17..21].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(bytes[21..29].try_into().unwrap()), 0.02);
        assert_eq!(u64::from_le_bytes(bytes[29..37].try_into().unwrap()), 9);
        assert_eq!(u64::from_le_bytes(bytes[37..45].try_into().unwrap()), 2);
        // first entry of the first link, bond ((0,0), μ=0)
        let re = f64::from_le_bytes(bytes[45..53].try_into().unwrap());
        assert_eq!(re, cfg.links()[0].matrix()[(0, 0)].re);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let cfg = sample();
        let mut bytes = Vec::new();
        write_wgf(&cfg, &mut bytes).unwrap();

        let mut bad = bytes.clone();
        bad[0] = b'X';
        let err = read_wgf::<f64, _>(bad.as_slice()).unwrap_err();
        assert!(matches!(err, WgfError::NotWgf));
        assert_eq!(err.to_string(), "not a WGF1 file");

        assert!(matches!(
            read_wgf::<f64, _>(&bytes[..bytes.len() - 3]),
            Err(WgfError::Truncated)
        ));

        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(read_wgf::<f64, _>(long.as_slice()), Err(WgfError::Trailing)));

        let mut fam = bytes.clone();
        fam[16] = 7;
        assert!(matches!(read_wgf::<f64, _>(fam.as_slice()), Err(WgfError::Header(_))));
    }
}
