//! Binary checkpoint of a team's networks.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic            8 bytes   "SWRMCKPT"
//! version          u32       1
//! agent_count      u32
//! actor_layers     u32       number of layer sizes that follow
//! actor_sizes      u32 × actor_layers
//! critic_layers    u32
//! critic_sizes     u32 × critic_layers
//! for each agent in index order:
//!     actor params   f64 × P_actor
//!     critic params  f64 × P_critic
//! ```
//!
//! Parameters follow the flat [`Mlp`] layout: for each layer in order, the
//! row-major weight matrix (one row per output unit) and then its biases.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::Mlp;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"SWRMCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint I/O: {0}")]
    Io(#[from] io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("malformed checkpoint: {0}")]
    Malformed(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub actors: Vec<Mlp>,
    pub critics: Vec<Mlp>,
}

fn write_sizes<W: Write>(w: &mut W, sizes: &[usize]) -> io::Result<()> {
    w.write_all(&(sizes.len() as u32).to_le_bytes())?;
    for &s in sizes {
        w.write_all(&(s as u32).to_le_bytes())?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_sizes<R: Read>(r: &mut R) -> Result<Vec<usize>, CheckpointError> {
    let n = read_u32(r)? as usize;
    if !(2..=64).contains(&n) {
        return Err(CheckpointError::Malformed("layer count"));
    }
    let sizes = (0..n)
        .map(|_| read_u32(r).map(|s| s as usize))
        .collect::<io::Result<Vec<_>>>()?;
    if sizes.contains(&0) {
        return Err(CheckpointError::Malformed("zero layer size"));
    }
    Ok(sizes)
}

fn read_params<R: Read>(r: &mut R, sizes: &[usize]) -> Result<Mlp, CheckpointError> {
    let n = Mlp::zeros(sizes).num_params();
    let mut bytes = vec![0u8; n * 8];
    r.read_exact(&mut bytes)?;
    let params = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Mlp::from_params(sizes, params).ok_or(CheckpointError::Malformed("parameter count"))
}

impl Checkpoint {
    pub fn new(actors: Vec<Mlp>, critics: Vec<Mlp>) -> Result<Self, CheckpointError> {
        if actors.len() != critics.len() || actors.is_empty() {
            return Err(CheckpointError::Malformed("actor/critic count"));
        }
        let same = |nets: &[Mlp]| nets.windows(2).all(|p| p[0].sizes() == p[1].sizes());
        if !same(&actors) || !same(&critics) {
            return Err(CheckpointError::Malformed("agents with different layer sizes"));
        }
        Ok(Self { actors, critics })
    }

    pub fn agent_count(&self) -> usize {
        self.actors.len()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
        w.write_all(&(self.actors.len() as u32).to_le_bytes())?;
        write_sizes(&mut w, self.actors[0].sizes())?;
        write_sizes(&mut w, self.critics[0].sizes())?;
        for (a, c) in self.actors.iter().zip(&self.critics) {
            for p in a.params().iter().chain(c.params()) {
                w.write_all(&p.to_le_bytes())?;
            }
        }
        w.flush()
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, CheckpointError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = read_u32(&mut r)?;
        if version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version(version));
        }
        let agents = read_u32(&mut r)? as usize;
        if agents == 0 {
            return Err(CheckpointError::Malformed("zero agents"));
        }
        let actor_sizes = read_sizes(&mut r)?;
        let critic_sizes = read_sizes(&mut r)?;
        let mut actors = Vec::with_capacity(agents);
        let mut critics = Vec::with_capacity(agents);
        for _ in 0..agents {
            actors.push(read_params(&mut r, &actor_sizes)?);
            critics.push(read_params(&mut r, &critic_sizes)?);
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(CheckpointError::Malformed("trailing bytes"));
        }
        Ok(Self { actors, critics })
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        self.write_to(BufWriter::new(File::create(path)?))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}
