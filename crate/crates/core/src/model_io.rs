//! Binary model files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "AFZM"            magic, 4 bytes
//! u32               format version
//! u64               payload length in bytes
//! payload
//! u32               CRC32 of every preceding byte
//! ```
//!
//! The payload holds the feature schema, standardization statistics, the
//! feature map, the training configuration and every machine's weights.

use std::io::{Read, Write};

use thiserror::Error;

use crate::classifier::{EmotionMachines, FeatureMap, Kernel, LinearMachine, Model, Standardizer, TrainConfig};
use crate::emotion::{parse_emotion, EmotionName};

pub const MAGIC: [u8; 4] = *b"AFZM";
pub const FORMAT_VERSION: u32 = 1;

const HEADER_LEN: usize = 4 + 4 + 8;
const TRAILER_LEN: usize = 4;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("not a model file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported model format version {found} (this reader understands {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },
    #[error("model file is truncated")]
    Truncated,
    #[error("model checksum mismatch (stored {stored:08x}, computed {computed:08x})")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("malformed model payload: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn to_bytes(model: &Model) -> Vec<u8> {
    let mut p = Payload::default();
    p.u32(model.schema_version);
    p.u32(model.feature_names.len() as u32);
    for name in &model.feature_names {
        p.str(name);
    }
    let s = &model.standardizer;
    for j in 0..s.mean.len() {
        p.f64(s.mean[j]);
        p.f64(s.std[j]);
        p.u8(s.excluded[j] as u8);
    }
    match &model.feature_map {
        FeatureMap::Identity => p.u8(0),
        FeatureMap::Quadratic => p.u8(2),
        FeatureMap::Fourier { gamma, omega, phase } => {
            p.u8(1);
            p.f64(*gamma);
            p.u32(omega.len() as u32);
            for row in omega {
                row.iter().for_each(|v| p.f64(*v));
            }
            phase.iter().for_each(|v| p.f64(*v));
        }
    }
    let c = &model.config;
    p.f64(c.c);
    p.u32(c.epochs);
    p.u64(c.seed);
    p.f64(c.temperature);
    p.u8(c.class_balance as u8);
    p.u32(model.emotions.len() as u32);
    for em in &model.emotions {
        p.str(em.emotion.as_str());
        p.u32(em.machines.len() as u32);
        for m in &em.machines {
            p.u32(m.weights.len() as u32);
            m.weights.iter().for_each(|v| p.f64(*v));
            p.f64(m.bias);
        }
    }

    let mut out = Vec::with_capacity(HEADER_LEN + p.0.len() + TRAILER_LEN);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(p.0.len() as u64).to_le_bytes());
    out.extend_from_slice(&p.0);
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<Model, ModelIoError> {
    if bytes.len() < 4 {
        return Err(ModelIoError::Truncated);
    }
    if bytes[..4] != MAGIC {
        return Err(ModelIoError::BadMagic);
    }
    if bytes.len() < HEADER_LEN + TRAILER_LEN {
        return Err(ModelIoError::Truncated);
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(ModelIoError::UnsupportedVersion { found: version, expected: FORMAT_VERSION });
    }
    let payload_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let body_len = bytes.len() - HEADER_LEN - TRAILER_LEN;
    if payload_len != body_len as u64 {
        return Err(if payload_len > body_len as u64 {
            ModelIoError::Truncated
        } else {
            ModelIoError::Malformed(format!("payload length {payload_len} but {body_len} bytes present"))
        });
    }
    let split = bytes.len() - TRAILER_LEN;
    let stored = u32::from_le_bytes(bytes[split..].try_into().unwrap());
    let computed = crc32fast::hash(&bytes[..split]);
    if stored != computed {
        return Err(ModelIoError::ChecksumMismatch { stored, computed });
    }

    let mut r = Reader { buf: &bytes[HEADER_LEN..split], pos: 0 };
    let schema_version = r.u32()?;
    let n_features = r.len(1 << 16)?;
    let feature_names = (0..n_features).map(|_| r.str()).collect::<Result<Vec<_>, _>>()?;
    let mut standardizer = Standardizer { mean: vec![], std: vec![], excluded: vec![] };
    for _ in 0..n_features {
        standardizer.mean.push(r.f64()?);
        standardizer.std.push(r.f64()?);
        standardizer.excluded.push(r.bool()?);
    }
    let feature_map = match r.u8()? {
        0 => FeatureMap::Identity,
        2 => FeatureMap::Quadratic,
        1 => {
            let gamma = r.f64()?;
            let components = r.len(1 << 20)?;
            let omega = (0..components)
                .map(|_| (0..n_features).map(|_| r.f64()).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            let phase = (0..components).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
            FeatureMap::Fourier { gamma, omega, phase }
        }
        tag => return Err(ModelIoError::Malformed(format!("unknown feature map tag {tag}"))),
    };
    let c = r.f64()?;
    let epochs = r.u32()?;
    let seed = r.u64()?;
    let temperature = r.f64()?;
    let class_balance = r.bool()?;
    let n_emotions = r.len(64)?;
    let mut emotions = Vec::with_capacity(n_emotions);
    for _ in 0..n_emotions {
        let token = r.str()?;
        let emotion = parse_emotion(&token).map_err(|e| ModelIoError::Malformed(e.to_string()))?;
        let n_machines = r.len(16)?;
        let mut machines = Vec::with_capacity(n_machines);
        for _ in 0..n_machines {
            let dim = r.len(1 << 20)?;
            let weights = (0..dim).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
            machines.push(LinearMachine { weights, bias: r.f64()? });
        }
        emotions.push(EmotionMachines { emotion, machines });
    }
    if r.pos != r.buf.len() {
        return Err(ModelIoError::Malformed(format!("{} trailing payload bytes", r.buf.len() - r.pos)));
    }

    let kernel: Kernel = feature_map.kernel();
    let config = TrainConfig {
        c,
        epochs,
        seed,
        temperature,
        kernel,
        class_balance,
        emotions: emotions.iter().map(|e: &EmotionMachines| e.emotion).collect::<Vec<EmotionName>>(),
    };
    Ok(Model { schema_version, feature_names, standardizer, feature_map, emotions, config })
}

pub fn save_model<W: Write>(model: &Model, mut destination: W) -> Result<(), ModelIoError> {
    destination.write_all(&to_bytes(model))?;
    Ok(())
}

pub fn load_model<R: Read>(mut source: R) -> Result<Model, ModelIoError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}

#[derive(Default)]
struct Payload(Vec<u8>);

impl Payload {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.0.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], ModelIoError> {
        let end = self.pos.checked_add(N).ok_or(ModelIoError::Truncated)?;
        let bytes = self.buf.get(self.pos..end).ok_or(ModelIoError::Truncated)?;
        self.pos = end;
        Ok(bytes.try_into().unwrap())
    }
    fn u8(&mut self) -> Result<u8, ModelIoError> {
        Ok(self.take::<1>()?[0])
    }
    fn bool(&mut self) -> Result<bool, ModelIoError> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(ModelIoError::Malformed(format!("invalid flag byte {b}"))),
        }
    }
    fn u32(&mut self) -> Result<u32, ModelIoError> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64, ModelIoError> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64, ModelIoError> {
        Ok(f64::from_le_bytes(self.take()?))
    }
    fn len(&mut self, max: usize) -> Result<usize, ModelIoError> {
        let n = self.u32()? as usize;
        if n > max {
            return Err(ModelIoError::Malformed(format!("count {n} exceeds limit {max}")));
        }
        Ok(n)
    }
    fn str(&mut self) -> Result<String, ModelIoError> {
        let n = self.len(1 << 10)?;
        let end = self.pos.checked_add(n).ok_or(ModelIoError::Truncated)?;
        let bytes = self.buf.get(self.pos..end).ok_or(ModelIoError::Truncated)?;
        self.pos = end;
        String::from_utf8(bytes.to_vec()).map_err(|e| ModelIoError::Malformed(e.to_string()))
    }
}
