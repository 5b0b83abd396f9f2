//! Flat key/value run configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Scales for every suite. Unknown keys are rejected; missing keys take the
/// defaults listed in [`KEYS`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub decompose_states_d1: usize,
    pub decompose_states_d2: usize,

    pub povm_protocols: usize,
    pub mc_protocols: usize,
    pub mc_shots: u64,
    pub growth_protocols: usize,
    pub growth_n: usize,

    pub levelk_scalar_cases: usize,
    pub levelk_scalar_n: usize,
    pub levelk_scalar_max_level: usize,
    pub levelk_matrix_cases: usize,
    pub levelk_matrix_n: usize,
    pub levelk_matrix_c: usize,
    pub levelk_matrix_max_level: usize,

    pub moment_configs: Vec<[usize; 3]>,
    pub identity_max_n: usize,

    pub alpha: f64,
    pub bhm_n: usize,
    pub bhm_k: usize,
    /// `0` means the module default.
    pub bhm_reps: usize,
    pub bhm_trials: u64,
    pub bhm_relation_n: usize,
    pub bhm_relation_shots: u64,
    pub bhm_hit_trials: u64,

    pub forr_n: usize,
    pub forr_k: usize,
    pub forr_epsilon: f64,
    /// `0` means the module default.
    pub forr_reps: u64,
    pub forr_trials: u64,
    pub forr_feasibility: f64,

    pub strip_d: usize,
    pub strip_shots: u64,
    pub oneway_pairs: usize,
    pub oneway_random_protocols: usize,

    pub oracle_n: usize,
    pub oracle_m: usize,
    pub oracle_c: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            decompose_states_d1: 100,
            decompose_states_d2: 25,
            povm_protocols: 50,
            mc_protocols: 20,
            mc_shots: 100_000,
            growth_protocols: 50,
            growth_n: 4,
            levelk_scalar_cases: 1000,
            levelk_scalar_n: 6,
            levelk_scalar_max_level: 3,
            levelk_matrix_cases: 500,
            levelk_matrix_n: 4,
            levelk_matrix_c: 2,
            levelk_matrix_max_level: 2,
            moment_configs: vec![[4, 1, 1], [4, 1, 2], [6, 2, 2]],
            identity_max_n: 6,
            alpha: 0.25,
            bhm_n: 8,
            bhm_k: 2,
            bhm_reps: 0,
            bhm_trials: 10_000,
            bhm_relation_n: 4,
            bhm_relation_shots: 100,
            bhm_hit_trials: 20_000,
            forr_n: 64,
            forr_k: 1,
            forr_epsilon: 0.5,
            forr_reps: 0,
            forr_trials: 300,
            forr_feasibility: 0.5,
            strip_d: 1,
            strip_shots: 200_000,
            oneway_pairs: 100,
            oneway_random_protocols: 5,
            oracle_n: 4,
            oracle_m: 1,
            oracle_c: 1,
        }
    }
}

/// Every key with a one-line description, in file order.
pub const KEYS: &[(&str, &str)] = &[
    ("decompose_states_d1", "random real states decomposed at d = 1"),
    ("decompose_states_d2", "random real states decomposed at d = 2"),
    ("povm_protocols", "random 2-round protocols (n = 2, d = m = 1) checked for POVM completeness"),
    ("mc_protocols", "random 2-round protocols compared against sequential sampling"),
    ("mc_shots", "shots per sampled protocol"),
    ("growth_protocols", "random SMP protocols in the Fourier growth chain, c alternating 1 and 2"),
    ("growth_n", "input length of the growth protocols"),
    ("levelk_scalar_cases", "random bounded functions in the scalar level audit"),
    ("levelk_scalar_n", "input length of the scalar cases"),
    ("levelk_scalar_max_level", "levels 1..=this are audited per scalar case"),
    ("levelk_matrix_cases", "random density-valued functions in the matrix level audit"),
    ("levelk_matrix_n", "input length of the matrix cases"),
    ("levelk_matrix_c", "qubits per matrix value"),
    ("levelk_matrix_max_level", "levels 1..=this are audited per matrix case"),
    ("moment_configs", "(n, m, k) triples for the exact moment comparison"),
    ("identity_max_n", "largest n in the exhaustive correlation identity and matching probability checks"),
    ("alpha", "edge fraction, m = floor(alpha n)"),
    ("bhm_n", "vertices in the BHM success run"),
    ("bhm_k", "copies in the BHM success run"),
    ("bhm_reps", "rounds per copy, 0 for ceil(log2(10k) / (2 alpha))"),
    ("bhm_trials", "trials in the BHM success run"),
    ("bhm_relation_n", "vertices in the exhaustive GF(2) relation check"),
    ("bhm_relation_shots", "shots per (x, matching) in the relation check"),
    ("bhm_hit_trials", "trials in the edge-hit rate check"),
    ("forr_n", "vector length in the forrelation demo"),
    ("forr_k", "copies in the forrelation demo"),
    ("forr_epsilon", "promise gap epsilon"),
    ("forr_reps", "swap tests per copy, 0 for the Hoeffding default"),
    ("forr_trials", "planted instances per label"),
    ("forr_feasibility", "planting feasibility constant C, epsilon >= 8C / sqrt(n)"),
    ("strip_d", "shared qubits per side in strip-qsmp (1 or 2); strip-oneway always audits d = 1 and 2"),
    ("strip_shots", "sampled runs of each stripped protocol"),
    ("oneway_pairs", "random (F, sigma) pairs in the entry-average identity"),
    ("oneway_random_protocols", "random one-way protocols per d checked against the quantization bound"),
    ("oracle_n", "vertices in the exhaustive classical search"),
    ("oracle_m", "edges in the exhaustive classical search"),
    ("oracle_c", "message bits in the exhaustive classical search"),
];

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::Config(msg));
        if !(self.alpha > 0.0 && self.alpha <= 0.5) {
            return bad(format!("alpha = {} must lie in (0, 1/2]", self.alpha));
        }
        if !(self.forr_epsilon > 0.0 && self.forr_epsilon <= 2.0) {
            return bad(format!("forr_epsilon = {} must lie in (0, 2]", self.forr_epsilon));
        }
        if !(1..=2).contains(&self.strip_d) {
            return bad(format!("strip_d = {} must be 1 or 2", self.strip_d));
        }
        if self.mc_shots == 0 || self.strip_shots == 0 || self.bhm_trials == 0 || self.forr_trials == 0 {
            return bad("shot and trial counts must be positive".into());
        }
        if self.levelk_scalar_max_level > self.levelk_scalar_n || self.levelk_matrix_max_level > self.levelk_matrix_n {
            return bad("audited levels cannot exceed the input length".into());
        }
        if self.identity_max_n > 8 {
            return bad(format!("identity_max_n = {} exceeds 8", self.identity_max_n));
        }
        Ok(())
    }

    /// `key = default  # description` for every key.
    pub fn describe_defaults() -> String {
        let table = toml::Table::try_from(Self::default()).expect("defaults serialize");
        KEYS.iter()
            .map(|(k, doc)| format!("  {k} = {}  # {doc}", table[*k]))
            .collect::<Vec<_>>()
            .join("\n")
    }
}
