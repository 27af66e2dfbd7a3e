//! On-disk cache of classical bounds, keyed by a hash of the measurement
//! frame and the maximisation method.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use ediqkd_core::classical::{FgcResult, GcpModel, Method, TransitionMatrix, VertexBest};
use ediqkd_core::tomography::MeasurementFrame;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AppError, AppResult};

pub const CACHE_DIR_ENV: &str = "EDIQKD_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Entry {
    f_gc: f64,
    vertex_index: Option<u32>,
    vertex_value: Option<f64>,
    omega: Vec<Vec<f64>>,
    prep: Vec<Vec<Vec<f64>>>,
}

impl Entry {
    fn from_result(r: &FgcResult) -> Self {
        Self {
            f_gc: r.f_gc,
            vertex_index: r.vertex.map(|v| v.index),
            vertex_value: r.vertex.map(|v| v.value),
            omega: r.model.omega.rows().iter().map(|row| row.to_vec()).collect(),
            prep: r
                .model
                .prep()
                .iter()
                .map(|i| i.iter().map(|a| a.to_vec()).collect())
                .collect(),
        }
    }

    fn into_result(self) -> Option<FgcResult> {
        let omega: [[f64; 8]; 8] = self
            .omega
            .iter()
            .map(|r| <[f64; 8]>::try_from(r.as_slice()).ok())
            .collect::<Option<Vec<_>>>()?
            .try_into()
            .ok()?;
        let prep: [[[f64; 8]; 2]; 3] = self
            .prep
            .iter()
            .map(|i| {
                i.iter()
                    .map(|a| <[f64; 8]>::try_from(a.as_slice()).ok())
                    .collect::<Option<Vec<_>>>()?
                    .try_into()
                    .ok()
            })
            .collect::<Option<Vec<_>>>()?
            .try_into()
            .ok()?;
        let model = GcpModel::new(TransitionMatrix::new(omega).ok()?, prep).ok()?;
        let vertex = match (self.vertex_index, self.vertex_value) {
            (Some(index), Some(value)) => Some(VertexBest { value, index }),
            _ => None,
        };
        Some(FgcResult {
            f_gc: self.f_gc,
            model,
            vertex,
        })
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Enumerate => "enumerate",
        Method::Refine => "refine",
        Method::Both => "both",
    }
}

/// Hex SHA-256 of the frame's Bloch vectors, the method and the crate version.
pub fn frame_key(frame: &MeasurementFrame, method: Method) -> String {
    let mut h = Sha256::new();
    h.update(b"ediqkd-fgc\0");
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    h.update(method_name(method).as_bytes());
    for v in frame.bloch_vectors().iter().flatten() {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FgcCache {
    dir: PathBuf,
}

impl FgcCache {
    pub fn at(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// `$EDIQKD_CACHE_DIR`, else the user cache directory, else the system
    /// temporary directory.
    pub fn from_env() -> Self {
        if let Some(d) = env::var_os(CACHE_DIR_ENV).filter(|d| !d.is_empty()) {
            return Self::at(d);
        }
        let base = env::var_os("XDG_CACHE_HOME")
            .filter(|d| !d.is_empty())
            .map(PathBuf::from)
            .or_else(|| env::var_os("HOME").map(|h| Path::new(&h).join(".cache")))
            .unwrap_or_else(env::temp_dir);
        Self::at(base.join("ediqkd"))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, frame: &MeasurementFrame, method: Method) -> PathBuf {
        self.dir.join(format!("fgc-{}.toml", frame_key(frame, method)))
    }

    /// Missing or unreadable entries count as misses.
    pub fn load(&self, frame: &MeasurementFrame, method: Method) -> Option<FgcResult> {
        let text = fs::read_to_string(self.path(frame, method)).ok()?;
        toml::from_str::<Entry>(&text).ok()?.into_result()
    }

    pub fn store(&self, frame: &MeasurementFrame, method: Method, r: &FgcResult) -> AppResult<()> {
        fs::create_dir_all(&self.dir)?;
        let text = toml::to_string(&Entry::from_result(r)).map_err(|e| AppError::Config(e.to_string()))?;
        let path = self.path(frame, method);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    pub fn get_or_compute(
        &self,
        frame: &MeasurementFrame,
        method: Method,
        compute: impl FnOnce() -> FgcResult,
    ) -> AppResult<(FgcResult, bool)> {
        if let Some(r) = self.load(frame, method) {
            return Ok((r, true));
        }
        let r = compute();
        self.store(frame, method, &r)?;
        Ok((r, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ediqkd_core::classical::maximize_fgc;

    #[test]
    fn keys_separate_frames_and_methods() {
        let r = MeasurementFrame::rotated();
        let a = MeasurementFrame::aligned();
        assert_ne!(frame_key(&r, Method::Both), frame_key(&a, Method::Both));
        assert_ne!(frame_key(&r, Method::Both), frame_key(&r, Method::Refine));
        assert_eq!(frame_key(&r, Method::Both).len(), 64);
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FgcCache::at(dir.path());
        let frame = MeasurementFrame::aligned();
        let r = maximize_fgc(&frame, Method::Refine);
        let (first, hit) = cache.get_or_compute(&frame, Method::Refine, || r).unwrap();
        assert!(!hit);
        let (second, hit) = cache
            .get_or_compute(&frame, Method::Refine, || panic!("should be cached"))
            .unwrap();
        assert!(hit);
        assert_eq!(first, second);
    }

    #[test]
    fn corrupt_entry_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FgcCache::at(dir.path());
        let frame = MeasurementFrame::aligned();
        fs::write(cache.path(&frame, Method::Refine), "f_gc = \"x\"").unwrap();
        assert!(cache.load(&frame, Method::Refine).is_none());
    }
}
