//! Dataset generation and the JSON-lines file format: one header line
//! followed by one [`SequenceRecord`] per line.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nnas_core::accumulate::layer_effectiveness_factors;
use nnas_core::circuit::{build_ghz_metrology, build_ising_trotter, LayeredCircuit};
use nnas_core::noise::{attach_noise, single_qubit_channel, two_qubit_channel, DecoherenceSpec};
use nnas_core::sim::{sample_shots, simulate, SimMode, MAX_SIM_QUBITS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};
use crate::record::{CircuitParams, SequenceRecord, Task};
use crate::regime::{RegimePlan, Scale};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SHOTS: u64 = 8192;
/// Trotter coupling ratio; the field strength is the unit.
pub const J_OVER_H: f64 = 0.6;
pub const H_DT_RANGE: (f64, f64) = (0.5, 2.0);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Train,
    Test,
}

impl std::str::FromStr for Split {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(HarnessError::Config(format!("unknown split `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub task: Task,
    /// Trotter chain length; ignored for ghz, where element `l` of a
    /// sequence is the `l`-qubit circuit.
    #[serde(default = "default_qubits")]
    pub qubits: usize,
    pub size: usize,
    #[serde(default)]
    pub p_r: f64,
    /// `None` disables noise.
    pub t1_us: Option<f64>,
    #[serde(default)]
    pub scale: Scale,
    #[serde(default)]
    pub split: Split,
    pub seed: u64,
    #[serde(default = "default_shots")]
    pub shots: u64,
    /// Multiplicative deviation `ε` applied as `p (1 + ε)`.
    #[serde(default)]
    pub p_perturbation: f64,
}

fn default_qubits() -> usize {
    4
}
fn default_shots() -> u64 {
    DEFAULT_SHOTS
}

impl DatasetConfig {
    pub fn new(task: Task, size: usize, p_r: f64, t1_us: Option<f64>, split: Split, seed: u64) -> Self {
        Self {
            task,
            qubits: default_qubits(),
            size,
            p_r,
            t1_us,
            scale: Scale::Desk,
            split,
            seed,
            shots: DEFAULT_SHOTS,
            p_perturbation: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let plan = self.plan()?;
        if self.task == Task::Trotter && !(2..=MAX_SIM_QUBITS).contains(&self.qubits) {
            return Err(HarnessError::Config(format!("trotter needs 2..={MAX_SIM_QUBITS} qubits, got {}", self.qubits)));
        }
        if self.task == Task::Ghz && plan.max_length() > MAX_SIM_QUBITS {
            return Err(HarnessError::Config(format!(
                "ghz sequences up to {} qubits exceed the simulator cap of {MAX_SIM_QUBITS}",
                plan.max_length()
            )));
        }
        if self.shots == 0 {
            return Err(HarnessError::Config("shots must be positive".into()));
        }
        if !(self.p_perturbation > -1.0 && self.p_perturbation.is_finite()) {
            return Err(HarnessError::Config(format!("p perturbation {}", self.p_perturbation)));
        }
        self.noise_spec()?;
        Ok(())
    }

    pub fn plan(&self) -> Result<RegimePlan> {
        RegimePlan::new(self.task, self.scale, self.p_r)
    }

    /// Nominal noise (no per-record jitter seed).
    pub fn noise_spec(&self) -> Result<DecoherenceSpec> {
        match self.t1_us {
            None => Ok(DecoherenceSpec::noiseless()),
            Some(t1) => Ok(DecoherenceSpec::scaled(t1)?),
        }
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("config serializes")))
    }

    /// Error rates in percent: single-qubit gate, two-qubit gate.
    pub fn error_rates_percent(&self) -> Result<(f64, f64)> {
        let spec = self.noise_spec()?;
        if spec.is_noiseless() {
            return Ok((0.0, 0.0));
        }
        Ok((100.0 * single_qubit_channel(&spec)?.error_probability(), 100.0 * two_qubit_channel(&spec)?.error_probability()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub records: usize,
    pub config: DatasetConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub records: Vec<SequenceRecord>,
}

/// The `θ` grid of a ghz split: `0.1..=5.0` for training, offset by half a
/// step for testing.
pub fn ghz_theta_grid(split: Split) -> Vec<f64> {
    match split {
        Split::Train => (1..=50).map(|k| k as f64 / 10.0).collect(),
        Split::Test => (0..=50).map(|k| 0.05 + k as f64 / 10.0).collect(),
    }
}

fn record_seed(seed: u64, split: Split, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((split as u64) << 48) | index as u64);
    rng.random()
}

/// Noisy circuits a record was generated from: one circuit for trotter,
/// the `1..=length`-qubit circuits for ghz.
pub fn record_circuits(record: &SequenceRecord, config: &DatasetConfig) -> Result<Vec<LayeredCircuit>> {
    let spec = config.noise_spec()?;
    match record.params {
        CircuitParams::Trotter { h_dt, j_over_h } => {
            let c = build_ising_trotter(record.n, j_over_h, 1.0, h_dt, record.length)?.compiled();
            Ok(vec![attach_noise(&c, &spec.with_seed(record.seed))?])
        }
        CircuitParams::Ghz { theta } => (1..=record.length)
            .map(|k| {
                let c = build_ghz_metrology(k, theta)?;
                Ok(attach_noise(&c, &spec.clone().with_seed(record.seed.wrapping_add(k as u64)))?)
            })
            .collect(),
    }
}

fn perturb(p: f64, eps: f64) -> f64 {
    (p * (1.0 + eps)).clamp(0.0, 1.0 - 1e-12)
}

fn generate_record(config: &DatasetConfig, plan: &RegimePlan, index: usize) -> Result<SequenceRecord> {
    let seed = record_seed(config.seed, config.split, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let length = match config.split {
        Split::Train => plan.sample(&mut rng),
        Split::Test => plan.max_length(),
    };
    let (params, n) = match config.task {
        Task::Trotter => {
            let h_dt = rng.random_range(H_DT_RANGE.0..=H_DT_RANGE.1);
            (CircuitParams::Trotter { h_dt, j_over_h: J_OVER_H }, config.qubits)
        }
        Task::Ghz => {
            let grid = ghz_theta_grid(config.split);
            // cycle the grid first so any size covers the whole range
            let theta = grid[index % grid.len()];
            (CircuitParams::Ghz { theta }, length)
        }
    };
    let mut record =
        SequenceRecord { id: index, task: config.task, params, n, length, noisy: vec![], noiseless: vec![], p_hats: vec![], seed };
    let circuits = record_circuits(&record, config)?;
    let (exact, noiseless, p) = match config.task {
        Task::Trotter => {
            let c = &circuits[0];
            (simulate::<f64>(c, SimMode::Noisy)?, simulate::<f64>(c, SimMode::Noiseless)?, layer_effectiveness_factors(c)?)
        }
        Task::Ghz => {
            let mut exact = Vec::with_capacity(length);
            let mut noiseless = Vec::with_capacity(length);
            let mut p = Vec::with_capacity(length);
            let mut prev_survival = 1.0;
            for c in &circuits {
                exact.push(*simulate::<f64>(c, SimMode::Noisy)?.last().expect("nonempty circuit"));
                noiseless.push(*simulate::<f64>(c, SimMode::Noiseless)?.last().expect("nonempty circuit"));
                let survival: f64 = layer_effectiveness_factors(c)?.iter().map(|p| 1.0 - p).product();
                p.push(1.0 - survival / prev_survival);
                prev_survival = survival;
            }
            (exact, noiseless, p)
        }
    };
    record.noisy = exact.iter().map(|&e| sample_shots(e, config.shots, &mut rng)).collect::<std::result::Result<_, _>>()?;
    record.noiseless = noiseless.iter().map(|v| v.clamp(-1.0, 1.0)).collect();
    record.p_hats = p.iter().map(|&v| perturb(v.max(0.0), config.p_perturbation)).collect();
    record.validate()?;
    Ok(record)
}

/// `config.size` records, generated in parallel from per-record seed
/// streams; identical for identical configs.
pub fn generate_dataset(config: &DatasetConfig) -> Result<Dataset> {
    config.validate()?;
    let plan = config.plan()?;
    let records = (0..config.size)
        .into_par_iter()
        .map(|i| generate_record(config, &plan, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        header: DatasetHeader {
            schema_version: SCHEMA_VERSION,
            config_hash: config.hash(),
            seed: config.seed,
            records: records.len(),
            config: config.clone(),
        },
        records,
    })
}

impl Dataset {
    pub fn config(&self) -> &DatasetConfig {
        &self.header.config
    }

    pub fn total_points(&self) -> usize {
        self.records.iter().map(|r| r.length).sum()
    }

    pub fn write_to(&self, w: impl Write) -> Result<()> {
        let mut w = BufWriter::new(w);
        let io = |e| HarnessError::io(Path::new("<dataset>"), e);
        serde_json::to_writer(&mut w, &self.header)?;
        w.write_all(b"\n").map_err(io)?;
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n").map_err(io)?;
        }
        w.flush().map_err(io)?;
        Ok(())
    }

    pub fn read_from(r: impl std::io::Read) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        let first = lines
            .next()
            .ok_or_else(|| HarnessError::Data("dataset file is empty".into()))?
            .map_err(|e| HarnessError::io(Path::new("<dataset>"), e))?;
        let header: DatasetHeader =
            serde_json::from_str(&first).map_err(|e| HarnessError::Data(format!("dataset header: {e}")))?;
        if header.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::Data(format!("unsupported schema version {}", header.schema_version)));
        }
        if header.config.hash() != header.config_hash {
            return Err(HarnessError::Data("dataset config hash mismatch".into()));
        }
        let mut records = Vec::with_capacity(header.records);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| HarnessError::io(Path::new("<dataset>"), e))?;
            if line.trim().is_empty() {
                continue;
            }
            let r: SequenceRecord =
                serde_json::from_str(&line).map_err(|e| HarnessError::Data(format!("record line {}: {e}", i + 2)))?;
            r.validate()?;
            records.push(r);
        }
        if records.len() != header.records {
            return Err(HarnessError::Data(format!("header announces {} records, found {}", header.records, records.len())));
        }
        Ok(Self { header, records })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
        self.write_to(f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))?;
        Self::read_from(f)
    }
}
