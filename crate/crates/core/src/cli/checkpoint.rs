//! Binary state checkpoints.
//!
//! Layout, all little endian:
//!
//! ```text
//! magic  b"MPCKPT01"
//! u64    n (points per axis)
//! f64    L
//! f64    t
//! u64    step index
//! u64    byte length of the kernel id, then the UTF-8 id
//! u64    number of s nodes, then the nodes as f64
//! blocks u (3), v (3), φ (3), ψ (3), θ, Θ, then η at every s node (3 each)
//! ```
//!
//! Each block holds `n³` values in grid order (x fastest).

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::history::HistoryBuffer;
use crate::state::{Model, State};

const MAGIC: &[u8; 8] = b"MPCKPT01";

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub n: usize,
    pub length: f64,
    pub time: f64,
    pub step: usize,
    pub kernel_id: String,
    pub s_nodes: Vec<f64>,
    pub state: State,
}

fn put_u64<W: Write>(w: &mut W, v: u64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_f64<W: Write>(w: &mut W, v: f64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn get_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn put_block<W: Write>(w: &mut W, f: &ScalarField) -> Result<()> {
    let mut buf = Vec::with_capacity(8 * f.as_slice().len());
    for v in f.as_slice() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    Ok(w.write_all(&buf)?)
}

fn get_block<R: Read>(r: &mut R, n: usize) -> Result<ScalarField> {
    let mut buf = vec![0u8; 8 * n * n * n];
    r.read_exact(&mut buf)?;
    let data: Vec<f64> = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("checkpoint holds non-finite values".into()));
    }
    ScalarField::from_vec(n, data)
}

fn state_blocks(s: &State) -> Vec<&ScalarField> {
    let mut out = Vec::new();
    for v in [&s.u, &s.v, &s.phi, &s.psi] {
        out.extend(v.0.iter());
    }
    out.push(&s.theta);
    out.push(&s.big_theta);
    for e in s.eta.nodes() {
        out.extend(e.0.iter());
    }
    out
}

/// Writes the state of `model` at time `t`, step `step`.
pub fn write_checkpoint<W: Write>(model: &Model, s: &State, t: f64, step: usize, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    put_u64(&mut w, model.grid.n() as u64)?;
    put_f64(&mut w, model.grid.length())?;
    put_f64(&mut w, t)?;
    put_u64(&mut w, step as u64)?;
    let id = model.kernel.id();
    put_u64(&mut w, id.len() as u64)?;
    w.write_all(id.as_bytes())?;
    put_u64(&mut w, model.sgrid.len() as u64)?;
    for &x in model.sgrid.nodes() {
        put_f64(&mut w, x)?;
    }
    for block in state_blocks(s) {
        put_block(&mut w, block)?;
    }
    Ok(w.flush()?)
}

/// Reads a checkpoint and checks it against `model`: grid, kernel id and
/// `s` nodes must match exactly.
pub fn read_checkpoint<R: Read>(model: &Model, mut r: R) -> Result<Checkpoint> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidInput("not a micropolar checkpoint".into()));
    }
    let n = get_u64(&mut r)? as usize;
    let length = get_f64(&mut r)?;
    let time = get_f64(&mut r)?;
    let step = get_u64(&mut r)? as usize;
    let id_len = get_u64(&mut r)? as usize;
    if id_len > 1 << 16 {
        return Err(Error::InvalidInput("corrupt checkpoint header".into()));
    }
    let mut id = vec![0u8; id_len];
    r.read_exact(&mut id)?;
    let kernel_id = String::from_utf8(id).map_err(|_| Error::InvalidInput("kernel id is not UTF-8".into()))?;
    let count = get_u64(&mut r)? as usize;
    if count > 1 << 20 {
        return Err(Error::InvalidInput("corrupt checkpoint header".into()));
    }
    let s_nodes = (0..count).map(|_| get_f64(&mut r)).collect::<Result<Vec<_>>>()?;

    if n != model.grid.n() {
        return Err(Error::GridMismatch {
            expected: model.grid.n(),
            found: n,
        });
    }
    if length != model.grid.length() {
        return Err(Error::InvalidInput(format!(
            "checkpoint box length {length} differs from {}",
            model.grid.length()
        )));
    }
    if kernel_id != model.kernel.id() {
        return Err(Error::InvalidInput(format!(
            "checkpoint kernel {kernel_id} differs from {}",
            model.kernel.id()
        )));
    }
    if s_nodes != model.sgrid.nodes() {
        return Err(Error::InvalidInput("checkpoint s-grid differs from the configured one".into()));
    }

    let mut state = model.zero_state();
    let vec3 = |r: &mut R| -> Result<[ScalarField; 3]> { Ok([get_block(r, n)?, get_block(r, n)?, get_block(r, n)?]) };
    state.u.0 = vec3(&mut r)?;
    state.v.0 = vec3(&mut r)?;
    state.phi.0 = vec3(&mut r)?;
    state.psi.0 = vec3(&mut r)?;
    state.theta = get_block(&mut r, n)?;
    state.big_theta = get_block(&mut r, n)?;
    let mut eta = Vec::with_capacity(count);
    for _ in 0..count {
        eta.push(crate::field::VectorField(vec3(&mut r)?));
    }
    state.eta = HistoryBuffer::from_nodes(model.sgrid.clone(), eta)?;
    Ok(Checkpoint {
        n,
        length,
        time,
        step,
        kernel_id,
        s_nodes,
        state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::kernel::Kernel;
    use crate::moduli::Moduli;
    use rand::SeedableRng;

    #[test]
    fn round_trip_is_bitwise() {
        let m = Model::new(
            Grid::new(4, 1.0).unwrap(),
            Moduli::default(),
            Kernel::exponential(0.5, 2.0).unwrap(),
        )
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let s = m.random_state(&mut rng);
        let mut buf = Vec::new();
        write_checkpoint(&m, &s, 1.25, 7, &mut buf).unwrap();
        let c = read_checkpoint(&m, buf.as_slice()).unwrap();
        assert_eq!((c.time, c.step), (1.25, 7));
        assert_eq!(c.state.to_flat(), s.to_flat());

        let other = Model::new(
            Grid::new(4, 1.0).unwrap(),
            Moduli::default(),
            Kernel::exponential(0.5, 3.0).unwrap(),
        )
        .unwrap();
        assert!(read_checkpoint(&other, buf.as_slice()).is_err());
        assert!(read_checkpoint(&m, &buf[..buf.len() - 1]).is_err());
    }
}
