//! Versioned binary checkpoints of a [`ClassifierModel`].
//!
//! All integers are little-endian `u64` unless noted, all reals
//! little-endian IEEE-754 `f64`. Field order of version 1:
//!
//! | field            | type                    |
//! |------------------|-------------------------|
//! | magic            | 8 bytes `DECTCKPT`      |
//! | version          | `u32` = 1               |
//! | ambient dim      | `u64`                   |
//! | num directions   | `u64`                   |
//! | constrained      | `u8` (0/1)              |
//! | directions       | `f64` x dirs*dim        |
//! | lambda           | `f64`                   |
//! | num heights      | `u64`                   |
//! | interval lo, hi  | `f64`, `f64`            |
//! | normalization    | `u8` 0 none, 1 vertex, 2 l2 |
//! | mode             | `u8` 0 hard, 1 smooth   |
//! | pool             | `u8` 0 sum, 1 mean      |
//! | curve embedding  | MLP block               |
//! | head             | MLP block               |
//!
//! An MLP block is `u64` layer-size count, the sizes as `u64`, `u64`
//! parameter count, then the flat parameters (per layer: weights row-major
//! `out x in`, then biases).

use std::io::{Read, Write};
use std::path::Path;

use super::mlp::MlpParams;
use super::model::{ClassifierModel, Pool};
use crate::ect::{DirectionSet, EctConfig, EctMode, Normalization};
use crate::error::{Error, Result};
use crate::io::write_atomic;

const MAGIC: &[u8; 8] = b"DECTCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(model: &ClassifierModel, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    put_u64(&mut w, model.directions.dim() as u64)?;
    put_u64(&mut w, model.directions.len() as u64)?;
    w.write_all(&[u8::from(model.directions.constrained())])?;
    for &x in model.directions.as_slice() {
        put_f64(&mut w, x)?;
    }
    let cfg = &model.ect_config;
    put_f64(&mut w, cfg.lambda)?;
    put_u64(&mut w, cfg.num_heights as u64)?;
    put_f64(&mut w, cfg.interval.0)?;
    put_f64(&mut w, cfg.interval.1)?;
    let norm = match cfg.normalization {
        Normalization::None => 0u8,
        Normalization::PerVertexCount => 1,
        Normalization::UnitL2 => 2,
    };
    let mode = match cfg.mode {
        EctMode::Hard => 0u8,
        EctMode::Smooth => 1,
    };
    let pool = match model.pool {
        Pool::Sum => 0u8,
        Pool::Mean => 1,
    };
    w.write_all(&[norm, mode, pool])?;
    put_mlp(&mut w, &model.curve_embed)?;
    put_mlp(&mut w, &model.head)?;
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<ClassifierModel> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let mut v = [0u8; 4];
    r.read_exact(&mut v)?;
    let version = u32::from_le_bytes(v);
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let dim = get_len(&mut r)?;
    let count = get_len(&mut r)?;
    let constrained = get_u8(&mut r)? != 0;
    let data = (0..dim * count)
        .map(|_| get_f64(&mut r))
        .collect::<Result<Vec<_>>>()?;
    let directions = DirectionSet::from_flat(dim, data, constrained)?;
    let lambda = get_f64(&mut r)?;
    let num_heights = get_len(&mut r)?;
    let lo = get_f64(&mut r)?;
    let hi = get_f64(&mut r)?;
    let normalization = match get_u8(&mut r)? {
        0 => Normalization::None,
        1 => Normalization::PerVertexCount,
        2 => Normalization::UnitL2,
        x => return Err(Error::Checkpoint(format!("bad normalization tag {x}"))),
    };
    let mode = match get_u8(&mut r)? {
        0 => EctMode::Hard,
        1 => EctMode::Smooth,
        x => return Err(Error::Checkpoint(format!("bad mode tag {x}"))),
    };
    let pool = match get_u8(&mut r)? {
        0 => Pool::Sum,
        1 => Pool::Mean,
        x => return Err(Error::Checkpoint(format!("bad pool tag {x}"))),
    };
    let ect_config = EctConfig {
        lambda,
        num_heights,
        interval: (lo, hi),
        normalization,
        mode,
    };
    ect_config.validate()?;
    let curve_embed = get_mlp(&mut r)?;
    let head = get_mlp(&mut r)?;
    let model = ClassifierModel {
        directions,
        ect_config,
        curve_embed,
        pool,
        head,
    };
    model.check()?;
    Ok(model)
}

pub fn save_checkpoint(model: &ClassifierModel, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_checkpoint(model, &mut buf)?;
    write_atomic(path, &buf)
}

pub fn load_checkpoint(path: &Path) -> Result<ClassifierModel> {
    let bytes = std::fs::read(path)?;
    read_checkpoint(bytes.as_slice())
}

fn put_u64<W: Write>(w: &mut W, x: u64) -> Result<()> {
    w.write_all(&x.to_le_bytes())?;
    Ok(())
}

fn put_f64<W: Write>(w: &mut W, x: f64) -> Result<()> {
    w.write_all(&x.to_le_bytes())?;
    Ok(())
}

fn put_mlp<W: Write>(w: &mut W, mlp: &MlpParams) -> Result<()> {
    put_u64(w, mlp.sizes().len() as u64)?;
    for &s in mlp.sizes() {
        put_u64(w, s as u64)?;
    }
    put_u64(w, mlp.num_params() as u64)?;
    for &p in mlp.params() {
        put_f64(w, p)?;
    }
    Ok(())
}

fn get_u8<R: Read>(r: &mut R) -> Result<u8> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}

fn get_len<R: Read>(r: &mut R) -> Result<usize> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    let x = u64::from_le_bytes(b);
    // Guards allocation against corrupted lengths.
    if x > (1 << 32) {
        return Err(Error::Checkpoint(format!("implausible length {x}")));
    }
    Ok(x as usize)
}

fn get_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn get_mlp<R: Read>(r: &mut R) -> Result<MlpParams> {
    let n = get_len(r)?;
    let sizes = (0..n).map(|_| get_len(r)).collect::<Result<Vec<_>>>()?;
    let p = get_len(r)?;
    let params = (0..p).map(|_| get_f64(r)).collect::<Result<Vec<_>>>()?;
    MlpParams::from_parts(&sizes, params)
}
