//! Binary state snapshots.
//!
//! Little-endian layout: `M` as u64, then `L`, `t`, `N`, `β` as f64, then
//! interleaved re/im f64 pairs for `φ` (M values), `Γ` and `Λ` (M² values
//! each, row-major).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::dynamics::SystemState;
use crate::error::{Error, Result};
use crate::grid::{Field, Kernel, SpatialGrid, Symmetry};
use crate::potential::PotentialTable;

const HEADER_BYTES: usize = 8 * 5;

/// Decoded snapshot contents.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub points: usize,
    pub half_length: f64,
    pub t: f64,
    pub n: f64,
    pub beta: f64,
    pub phi: Array1<C64>,
    pub gamma: Array2<C64>,
    pub lambda: Array2<C64>,
}

impl Snapshot {
    pub fn of(s: &SystemState) -> Self {
        let g = s.phi.grid();
        Snapshot {
            points: g.points(),
            half_length: g.half_length(),
            t: s.t,
            n: s.n(),
            beta: s.potential.beta(),
            phi: s.phi.values().clone(),
            gamma: s.gamma.values().clone(),
            lambda: s.lambda.values().clone(),
        }
    }

    /// Rebuilds a state on `table`, whose grid and `N` must match the header.
    pub fn into_state(self, table: Arc<PotentialTable>) -> Result<SystemState> {
        let g = table.grid();
        if g.points() != self.points || g.half_length() != self.half_length {
            return Err(Error::Snapshot(format!(
                "snapshot grid (L={}, M={}) differs from configured grid (L={}, M={})",
                self.half_length,
                self.points,
                g.half_length(),
                g.points()
            )));
        }
        if table.n() != self.n {
            return Err(Error::Snapshot(format!(
                "snapshot N={} differs from configured N={}",
                self.n,
                table.n()
            )));
        }
        let phi = Field::new(g, self.phi)?;
        let gamma = Kernel::new(g, self.gamma, Symmetry::Hermitian)?;
        let lambda = Kernel::new(g, self.lambda, Symmetry::Symmetric)?;
        SystemState::new(self.t, phi, gamma, lambda, table)
    }

    pub fn grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.half_length, self.points)
    }

    pub fn encode(&self) -> Vec<u8> {
        let m = self.points;
        let mut out = Vec::with_capacity(HEADER_BYTES + 16 * (m + 2 * m * m));
        out.extend_from_slice(&(m as u64).to_le_bytes());
        for v in [self.half_length, self.t, self.n, self.beta] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for z in self.phi.iter().chain(self.gamma.iter()).chain(self.lambda.iter()) {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_BYTES {
            return Err(Error::Snapshot(format!("truncated header ({} bytes)", bytes.len())));
        }
        let word = |i: usize| -> [u8; 8] { bytes[8 * i..8 * i + 8].try_into().unwrap() };
        let m = u64::from_le_bytes(word(0));
        let m = usize::try_from(m).map_err(|_| Error::Snapshot(format!("M={m} too large")))?;
        let f = |i| f64::from_le_bytes(word(i));
        let count = m
            .checked_mul(m)
            .and_then(|mm| mm.checked_mul(2))
            .and_then(|v| v.checked_add(m))
            .ok_or_else(|| Error::Snapshot(format!("M={m} too large")))?;
        let want = HEADER_BYTES + 16 * count;
        if bytes.len() != want {
            return Err(Error::Snapshot(format!(
                "expected {want} bytes for M={m}, found {}",
                bytes.len()
            )));
        }
        let mut vals = bytes[HEADER_BYTES..].chunks_exact(16).map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            C64::new(re, im)
        });
        let phi: Array1<C64> = vals.by_ref().take(m).collect();
        let gamma = Array2::from_shape_vec((m, m), vals.by_ref().take(m * m).collect()).unwrap();
        let lambda = Array2::from_shape_vec((m, m), vals.collect()).unwrap();
        Ok(Snapshot {
            points: m,
            half_length: f(1),
            t: f(2),
            n: f(3),
            beta: f(4),
            phi,
            gamma,
            lambda,
        })
    }
}

pub fn write_snapshot(path: &Path, s: &SystemState) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&Snapshot::of(s).encode())?;
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    Snapshot::decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{Discretization, InteractionPotential, Profile};

    fn state() -> SystemState {
        let g = SpatialGrid::new(4.0, 16).unwrap();
        let pot = InteractionPotential::new(Profile::Gaussian, 0.5, 4.0)
            .unwrap()
            .with_discretization(Discretization::BandLimited);
        let t = Arc::new(PotentialTable::new(&pot, &g).unwrap());
        let phi = Field::from_fn(&g, |x| C64::from_polar((-x * x).exp(), 0.3 * x));
        let mut s = SystemState::new(0.0, phi.clone(), Kernel::projector(&phi), Kernel::pair(&phi), t).unwrap();
        s.t = 0.125;
        s
    }

    #[test]
    fn round_trip_is_bitwise() {
        let s = state();
        let snap = Snapshot::of(&s);
        let bytes = snap.encode();
        assert_eq!(bytes.len(), 40 + 16 * (16 + 2 * 256));
        assert_eq!(&bytes[..8], &16u64.to_le_bytes());
        let back = Snapshot::decode(&bytes).unwrap();
        assert_eq!(back, snap);
        let s2 = back.into_state(s.potential.clone()).unwrap();
        assert_eq!(s2.phi.values(), s.phi.values());
        assert_eq!(s2.t, 0.125);
    }

    #[test]
    fn rejects_bad_input() {
        let bytes = Snapshot::of(&state()).encode();
        assert!(Snapshot::decode(&bytes[..20]).is_err());
        assert!(Snapshot::decode(&bytes[..bytes.len() - 1]).is_err());
        let other = SpatialGrid::new(4.0, 32).unwrap();
        let t = Arc::new(PotentialTable::free(&other, 4.0).unwrap());
        assert!(Snapshot::decode(&bytes).unwrap().into_state(t).is_err());
    }
}
