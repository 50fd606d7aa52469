//! Optional package/DRAM energy sampling from the Linux powercap tree.
//!
//! Each zone directory (`intel-rapl:0`, `intel-rapl:0:1`, ...) holds a
//! `name`, a cumulative `energy_uj` counter and `max_energy_range_uj`, the
//! value at which the counter wraps to zero. Zones named `package-*` are
//! summed into the CPU figure and zones named `dram` into the memory figure.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub const DEFAULT_POWERCAP_ROOT: &str = "/sys/class/powercap";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Package,
    Dram,
}

#[derive(Debug, Clone)]
struct Zone {
    kind: DomainKind,
    energy: PathBuf,
    max_range: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub cpu_j: f64,
    pub mem_j: f64,
}

impl EnergyRecord {
    pub fn total_j(&self) -> f64 {
        self.cpu_j + self.mem_j
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum EnergySample {
    Measured(EnergyRecord),
    Unsupported { reason: String },
}

impl EnergySample {
    pub fn record(&self) -> Option<EnergyRecord> {
        match self {
            EnergySample::Measured(r) => Some(*r),
            EnergySample::Unsupported { .. } => None,
        }
    }
}

/// Counter difference accounting for at most one wrap at `max_range`.
pub fn wrap_delta(start: u64, end: u64, max_range: u64) -> u64 {
    if end >= start {
        end - start
    } else {
        end + max_range.saturating_sub(start)
    }
}

fn read_u64(path: &Path) -> Result<u64, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    text.trim()
        .parse()
        .map_err(|e| format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone)]
pub struct EnergySampler {
    zones: Vec<Zone>,
}

impl EnergySampler {
    /// Scans `root` for package and DRAM zones. Any failure, including
    /// unreadable counters, yields the reason energy is unavailable.
    pub fn discover(root: &Path) -> Result<Self, String> {
        let mut dirs: Vec<PathBuf> = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(dir) = stack.pop() {
            let entries = fs::read_dir(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            for entry in entries.flatten() {
                let path = entry.path();
                let name = entry.file_name().to_string_lossy().into_owned();
                if !name.contains("rapl") || !path.is_dir() {
                    continue;
                }
                // the same zone is reachable both nested and as a top-level link
                let real = fs::canonicalize(&path).unwrap_or(path);
                if !dirs.contains(&real) {
                    dirs.push(real.clone());
                    stack.push(real);
                }
            }
        }
        dirs.sort();
        let mut zones = Vec::new();
        for dir in dirs {
            let Ok(name) = fs::read_to_string(dir.join("name")) else {
                continue;
            };
            let name = name.trim();
            let kind = if name.starts_with("package") {
                DomainKind::Package
            } else if name == "dram" {
                DomainKind::Dram
            } else {
                continue;
            };
            let energy = dir.join("energy_uj");
            read_u64(&energy)?;
            let max_range = read_u64(&dir.join("max_energy_range_uj"))?;
            zones.push(Zone { kind, energy, max_range });
        }
        if zones.is_empty() {
            return Err(format!("no package or dram powercap zones under {}", root.display()));
        }
        Ok(Self { zones })
    }

    fn read_all(&self) -> Result<Vec<u64>, String> {
        self.zones.iter().map(|z| read_u64(&z.energy)).collect()
    }

    /// Runs `window` and reports the energy consumed while it ran.
    pub fn measure<T>(&self, window: impl FnOnce() -> T) -> (T, EnergySample) {
        let start = self.read_all();
        let out = window();
        let sample = match (start, self.read_all()) {
            (Ok(start), Ok(end)) => {
                let mut rec = EnergyRecord::default();
                for ((z, s), e) in self.zones.iter().zip(start).zip(end) {
                    let joules = wrap_delta(s, e, z.max_range) as f64 * 1e-6;
                    match z.kind {
                        DomainKind::Package => rec.cpu_j += joules,
                        DomainKind::Dram => rec.mem_j += joules,
                    }
                }
                EnergySample::Measured(rec)
            }
            (Err(reason), _) | (_, Err(reason)) => EnergySample::Unsupported { reason },
        };
        (out, sample)
    }
}

/// Measures `window` against the powercap tree at `root`, or runs it
/// unmeasured and explains why.
pub fn sample_energy<T>(root: &Path, window: impl FnOnce() -> T) -> (T, EnergySample) {
    match EnergySampler::discover(root) {
        Ok(s) => s.measure(window),
        Err(reason) => (window(), EnergySample::Unsupported { reason }),
    }
}
