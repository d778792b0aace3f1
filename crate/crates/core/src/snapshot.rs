//! Self-describing binary state container.
//!
//! Layout (little-endian throughout):
//!   bytes 0..7    magic "GYROFP1"
//!   u32           K (Fourier truncation)
//!   u32           N_u (radial node count)
//!   f64           u_max, T, nu, beta, t
//!   then (2K+1)^2 * N_u complex coefficients as (re, im) f64 pairs,
//!   row-major in (k1, k2, j) storage order.

use crate::distribution::GyroDistribution;
use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::solver::PhysicalParams;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

pub const MAGIC: &[u8; 7] = b"GYROFP1";

/// Everything needed to resume a run.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub params: PhysicalParams,
    pub time: f64,
    pub f: GyroDistribution,
}

pub fn write_snapshot(path: &Path, f: &GyroDistribution, params: &PhysicalParams, time: f64) -> Result<()> {
    let mut buf: Vec<u8> = Vec::with_capacity(7 + 8 + 40 + f.modal().len() * 16);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(params.k_max as u32).to_le_bytes());
    buf.extend_from_slice(&(params.n_u as u32).to_le_bytes());
    for v in [params.u_max, params.temperature, params.nu, params.beta, time] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for c in f.modal().iter() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    read_snapshot_bytes(&bytes)
}

pub fn read_snapshot_bytes(bytes: &[u8]) -> Result<Snapshot> {
    if bytes.len() < 7 {
        return Err(Error::Format("file shorter than the magic string".into()));
    }
    if &bytes[0..7] != MAGIC {
        return Err(Error::Format("bad magic: not a GYROFP1 snapshot".into()));
    }
    let header_len = 7 + 4 + 4 + 5 * 8;
    if bytes.len() < header_len {
        return Err(Error::Format("truncated header".into()));
    }
    let rd_u32 = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().expect("4 bytes"));
    let rd_f64 = |off: usize| f64::from_le_bytes(bytes[off..off + 8].try_into().expect("8 bytes"));
    let k_max = rd_u32(7) as usize;
    let n_u = rd_u32(11) as usize;
    if k_max > 4096 || n_u == 0 || n_u > 16_000_000 {
        return Err(Error::Format(format!("implausible dimensions K = {k_max}, N_u = {n_u}")));
    }
    let u_max = rd_f64(15);
    let temperature = rd_f64(23);
    let nu = rd_f64(31);
    let beta = rd_f64(39);
    let time = rd_f64(47);

    let n = 2 * k_max + 1;
    let count = n * n * n_u;
    let expected = header_len + count * 16;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "payload size mismatch: expected {expected} bytes, file has {}",
            bytes.len()
        )));
    }

    let grid = Arc::new(VelocityGrid::new(n_u, u_max)?);
    let mut f = GyroDistribution::zeros(k_max, grid);
    {
        let modal = f.modal_mut();
        let flat = modal.as_slice_mut().expect("contiguous");
        for (i, c) in flat.iter_mut().enumerate() {
            let off = header_len + i * 16;
            c.re = rd_f64(off);
            c.im = rd_f64(off + 8);
        }
    }
    let params = PhysicalParams {
        nu,
        beta,
        temperature,
        k_max,
        n_u,
        u_max,
    };
    Ok(Snapshot { params, time, f })
}
