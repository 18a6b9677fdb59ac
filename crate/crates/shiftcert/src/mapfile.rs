//! Binary and JSON files for representable maps.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! magic    8 bytes  "SCMAP\0\0\x01"
//! src      origin (2 x f64 bits), eta (f64 bits), shape (2 x u32)
//! dst      same
//! count    u64
//! records  id u64, tag u8, then
//!            tag 0: lo (2 x u32), hi (2 x u32)
//!            tag 1: n u32, n ids u64 (sorted), bbox lo/hi (4 x u32)
//! crc32    u32 over everything before it
//! ```

use serde::{Deserialize, Serialize};
use shiftcert_core::grid::{CubeId, Grid, Rect};
use shiftcert_core::mvmap::{RepresentableMvMap, Value};
use std::collections::BTreeMap;
use std::path::Path;

use crate::error::PipelineError;

pub const MAGIC: [u8; 8] = *b"SCMAP\0\0\x01";

const HEADER_LEN: usize = 8 + 2 * 32 + 8;

fn put_grid(out: &mut Vec<u8>, g: &Grid) {
    for v in [g.origin()[0], g.origin()[1], g.eta()] {
        out.extend_from_slice(&v.to_bits().to_le_bytes());
    }
    for s in g.shape() {
        out.extend_from_slice(&s.to_le_bytes());
    }
}

fn put_rect(out: &mut Vec<u8>, r: &Rect) {
    for v in [r.lo[0], r.lo[1], r.hi[0], r.hi[1]] {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode(map: &RepresentableMvMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + map.len() * 25 + 4);
    out.extend_from_slice(&MAGIC);
    put_grid(&mut out, map.src());
    put_grid(&mut out, map.dst());
    out.extend_from_slice(&(map.len() as u64).to_le_bytes());
    for (c, v) in map.iter() {
        out.extend_from_slice(&c.to_le_bytes());
        match v {
            Value::Rect(r) => {
                out.push(0);
                put_rect(&mut out, r);
            }
            Value::Set { ids, bbox } => {
                out.push(1);
                out.extend_from_slice(&(ids.len() as u32).to_le_bytes());
                for id in ids {
                    out.extend_from_slice(&id.to_le_bytes());
                }
                put_rect(&mut out, bbox);
            }
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or("truncated")?;
        let s = &self.buf[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, String> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn grid(&mut self) -> Result<Grid, String> {
        let o = [f64::from_bits(self.u64()?), f64::from_bits(self.u64()?)];
        let eta = f64::from_bits(self.u64()?);
        let shape = [self.u32()?, self.u32()?];
        Grid::new(o, eta, shape).map_err(|e| format!("bad grid: {e}"))
    }

    fn rect(&mut self) -> Result<Rect, String> {
        Ok(Rect { lo: [self.u32()?, self.u32()?], hi: [self.u32()?, self.u32()?] })
    }
}

/// Decodes a map and checks the checksum, the grids and every value.
pub fn decode(buf: &[u8]) -> Result<RepresentableMvMap, String> {
    if buf.len() < HEADER_LEN + 4 {
        return Err("truncated".into());
    }
    let (body, tail) = buf.split_at(buf.len() - 4);
    let want = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
    if crc32fast::hash(body) != want {
        return Err("checksum mismatch".into());
    }
    let mut r = Reader { buf: body, at: 0 };
    if r.take(8)? != MAGIC {
        return Err("not a map file".into());
    }
    let src = r.grid()?;
    let dst = r.grid()?;
    let count = r.u64()?;
    let mut values = BTreeMap::new();
    let mut prev: Option<CubeId> = None;
    for _ in 0..count {
        let c = r.u64()?;
        if prev.is_some_and(|p| p >= c) {
            return Err(format!("cube ids out of order at {c}"));
        }
        prev = Some(c);
        let v = match r.u8()? {
            0 => Value::Rect(r.rect()?),
            1 => {
                let n = r.u32()? as usize;
                let ids = (0..n).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
                let bbox = r.rect()?;
                let v = Value::from_sorted(&dst, ids).map_err(|e| format!("cube {c}: {e}"))?;
                if v.bbox() != bbox {
                    return Err(format!("cube {c}: stored bounding block disagrees"));
                }
                v
            }
            t => return Err(format!("unknown value tag {t}")),
        };
        values.insert(c, v);
    }
    if r.at != body.len() {
        return Err("trailing bytes".into());
    }
    RepresentableMvMap::from_values(src, dst, values).map_err(|e| e.to_string())
}

pub fn write_map(path: &Path, map: &RepresentableMvMap) -> Result<(), PipelineError> {
    std::fs::write(path, encode(map)).map_err(|e| PipelineError::io(path, e))
}

pub fn read_map(path: &Path) -> Result<RepresentableMvMap, PipelineError> {
    let buf = std::fs::read(path).map_err(|e| PipelineError::io(path, e))?;
    decode(&buf).map_err(|e| PipelineError::format(path, e))
}

/// Human-readable mirror of the binary file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapJson {
    pub src: Grid,
    pub dst: Grid,
    pub values: Vec<CubeValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeValue {
    pub cube: CubeId,
    #[serde(flatten)]
    pub value: ValueJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueJson {
    Rect { rect: Rect },
    Ids { ids: Vec<CubeId> },
}

impl MapJson {
    pub fn from_map(map: &RepresentableMvMap) -> MapJson {
        let values = map
            .iter()
            .map(|(cube, v)| CubeValue {
                cube,
                value: match v {
                    Value::Rect(r) => ValueJson::Rect { rect: *r },
                    Value::Set { ids, .. } => ValueJson::Ids { ids: ids.clone() },
                },
            })
            .collect();
        MapJson { src: *map.src(), dst: *map.dst(), values }
    }

    pub fn to_map(&self) -> Result<RepresentableMvMap, String> {
        let mut values = BTreeMap::new();
        for cv in &self.values {
            let v = match &cv.value {
                ValueJson::Rect { rect } => Value::Rect(*rect),
                ValueJson::Ids { ids } => {
                    let mut ids = ids.clone();
                    ids.sort_unstable();
                    ids.dedup();
                    Value::from_sorted(&self.dst, ids).map_err(|e| format!("cube {}: {e}", cv.cube))?
                }
            };
            values.insert(cv.cube, v);
        }
        RepresentableMvMap::from_values(self.src, self.dst, values).map_err(|e| e.to_string())
    }
}

pub fn write_map_json(path: &Path, map: &RepresentableMvMap) -> Result<(), PipelineError> {
    let text = serde_json::to_string(&MapJson::from_map(map)).expect("map serializes");
    std::fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

pub fn read_map_json(path: &Path) -> Result<RepresentableMvMap, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    let m: MapJson = serde_json::from_str(&text).map_err(|e| PipelineError::format(path, e.to_string()))?;
    m.to_map().map_err(|e| PipelineError::format(path, e))
}

/// One-paragraph description for `inspect`.
pub fn summary(map: &RepresentableMvMap) -> String {
    let (s, d) = (map.src(), map.dst());
    let sets = map.iter().filter(|(_, v)| !v.is_rect()).count();
    let widest = map.iter().map(|(_, v)| v.bbox().extent()[0].max(v.bbox().extent()[1])).max().unwrap_or(0);
    let domain = map.domain();
    let diam = map.diam_over(&domain).unwrap_or(0.0);
    format!(
        "src grid: origin {:?}, eta {}, shape {:?}\n\
         dst grid: origin {:?}, eta {}, shape {:?}\n\
         cubes: {}\n\
         non-rectangular values: {}\n\
         widest value: {} cubes\n\
         value diameter: {}",
        s.origin(),
        s.eta(),
        s.shape(),
        d.origin(),
        d.eta(),
        d.shape(),
        map.len(),
        sets,
        widest,
        diam
    )
}
