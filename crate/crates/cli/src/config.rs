use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeChoice {
    /// Triangular primal lattice; its dual is the honeycomb.
    #[serde(alias = "honeycomb")]
    Tri,
    Square,
    LozengeDiag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    /// `W x H` array of unit hexagons.
    Hexagons,
    /// Flat hexagon of radius `W`.
    FlatHexagon,
    /// `W x H` lattice parallelogram.
    Parallelogram,
}

/// Everything a run depends on. Echoed into every output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeChoice,
    pub shape: Shape,
    pub extent: [usize; 2],
    pub mesh: f64,
    pub seed: u64,
    pub samples: usize,
    pub out: PathBuf,
    /// 0 uses every available hardware thread.
    pub threads: usize,
    /// Random black/white pairs for `kernel`.
    pub pairs: usize,
    /// Also evaluate the finite-volume kernel in `probs`.
    pub finite: bool,
    /// Number of increments for `moments`; moments of order 2..=k are reported.
    pub k: usize,
    /// Mesh denominators for the exact covariance trend in `moments`.
    pub covariance_meshes: Vec<usize>,
    /// Also estimate `Var(H phi)` in `moments`.
    pub variance: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lattice: LatticeChoice::Tri,
            shape: Shape::Hexagons,
            extent: [4, 3],
            mesh: 1.0,
            seed: 1,
            samples: 100,
            out: PathBuf::from("out"),
            threads: 0,
            pairs: 1000,
            finite: false,
            k: 4,
            covariance_meshes: Vec::new(),
            variance: false,
        }
    }
}

impl RunConfig {
    /// Defaults, then the config file, then flags.
    pub fn resolve(file: Option<&Path>, flags: Map<String, Value>) -> Result<Self, String> {
        let mut merged = Map::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let table: toml::Table = toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            let v = serde_json::to_value(table).map_err(|e| e.to_string())?;
            if let Value::Object(m) = v {
                merged.extend(m);
            }
        }
        merged.extend(flags);
        let cfg: Self = serde_json::from_value(Value::Object(merged)).map_err(|e| format!("bad configuration: {e}"))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), String> {
        if self.extent.contains(&0) {
            return Err("extent must be positive".into());
        }
        if !(self.mesh > 0.0 && self.mesh.is_finite()) {
            return Err(format!("mesh {} must be positive", self.mesh));
        }
        if self.k == 0 {
            return Err("k must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "lattice = \"square\"\nseed = 3\nextent = [5, 6]\n").unwrap();
        let mut flags = Map::new();
        flags.insert("seed".into(), Value::from(9));
        let cfg = RunConfig::resolve(Some(&path), flags).unwrap();
        assert_eq!(cfg.lattice, LatticeChoice::Square);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.extent, [5, 6]);
    }

    #[test]
    fn honeycomb_is_tri() {
        let mut flags = Map::new();
        flags.insert("lattice".into(), Value::from("honeycomb"));
        assert_eq!(RunConfig::resolve(None, flags).unwrap().lattice, LatticeChoice::Tri);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut flags = Map::new();
        flags.insert("latice".into(), Value::from("tri"));
        assert!(RunConfig::resolve(None, flags).is_err());
    }
}
