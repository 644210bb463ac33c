//! Problem data: jobs, machines, weights, processing and setup times, and
//! machine eligibility.
//!
//! Jobs are numbered `1..=n`; job `0` is the fictitious start job whose
//! setup row `s_0j` holds the setup incurred when `j` runs first on a
//! machine. Machines are numbered `0..m`.

use std::fmt;
use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Job index. `0` is the fictitious start job, real jobs are `1..=n`.
pub type JobId = usize;
/// Machine index in `0..m`.
pub type MachineId = usize;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("invalid instance: {}", join_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// One violated instance invariant, with the offending location.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub location: String,
    pub message: String,
}

impl Diagnostic {
    fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// A scheduling instance.
///
/// The serialized form is the on-disk instance file: `weights[j-1]`,
/// `eligible[k][j-1]`, `processing[k][j-1]` and `setup[k][i][j-1]` where the
/// predecessor index `i` runs over `0..=n` with `0` the fictitious job.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    n: usize,
    m: usize,
    weights: Vec<u32>,
    eligible: Vec<Vec<bool>>,
    processing: Vec<Vec<u32>>,
    setup: Vec<Vec<Vec<u32>>>,
}

impl Instance {
    /// Builds an instance from raw tables, checking shapes and invariants.
    pub fn from_parts(
        weights: Vec<u32>,
        eligible: Vec<Vec<bool>>,
        processing: Vec<Vec<u32>>,
        setup: Vec<Vec<Vec<u32>>>,
    ) -> Result<Self, InstanceError> {
        let inst = Instance {
            n: weights.len(),
            m: eligible.len(),
            weights,
            eligible,
            processing,
            setup,
        };
        inst.check_shape()?;
        let diags = validate(&inst);
        if diags.is_empty() {
            Ok(inst)
        } else {
            Err(InstanceError::Invalid(diags))
        }
    }

    pub fn num_jobs(&self) -> usize {
        self.n
    }

    pub fn num_machines(&self) -> usize {
        self.m
    }

    pub fn jobs(&self) -> RangeInclusive<JobId> {
        1..=self.n
    }

    pub fn machines(&self) -> std::ops::Range<MachineId> {
        0..self.m
    }

    #[inline]
    pub fn weight(&self, job: JobId) -> u32 {
        self.weights[job - 1]
    }

    #[inline]
    pub fn is_eligible(&self, machine: MachineId, job: JobId) -> bool {
        job >= 1 && self.eligible[machine][job - 1]
    }

    #[inline]
    pub fn processing(&self, machine: MachineId, job: JobId) -> u32 {
        self.processing[machine][job - 1]
    }

    /// Setup time for `job` directly after `pred` on `machine`; `pred = 0`
    /// is the initial setup.
    #[inline]
    pub fn setup(&self, machine: MachineId, pred: JobId, job: JobId) -> u32 {
        self.setup[machine][pred][job - 1]
    }

    /// Jobs eligible on `machine`, ascending.
    pub fn eligible_jobs(&self, machine: MachineId) -> Vec<JobId> {
        self.jobs()
            .filter(|&j| self.is_eligible(machine, j))
            .collect()
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.iter().map(|&w| u64::from(w)).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let raw: Instance = serde_json::from_str(text).map_err(|e| InstanceError::Parse {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        raw.check_shape()?;
        let diags = validate(&raw);
        if diags.is_empty() {
            Ok(raw)
        } else {
            Err(InstanceError::Invalid(diags))
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), InstanceError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, InstanceError> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    fn check_shape(&self) -> Result<(), InstanceError> {
        let parse = |location: String, message: String| InstanceError::Parse { location, message };
        if self.weights.len() != self.n {
            return Err(parse(
                "weights".into(),
                format!("expected {} entries, found {}", self.n, self.weights.len()),
            ));
        }
        for (name, table_len) in [
            ("eligible", self.eligible.len()),
            ("processing", self.processing.len()),
            ("setup", self.setup.len()),
        ] {
            if table_len != self.m {
                return Err(parse(
                    name.into(),
                    format!("expected {} machine rows, found {table_len}", self.m),
                ));
            }
        }
        for k in 0..self.m {
            if self.eligible[k].len() != self.n {
                return Err(parse(
                    format!("eligible[{k}]"),
                    format!("expected {} entries, found {}", self.n, self.eligible[k].len()),
                ));
            }
            if self.processing[k].len() != self.n {
                return Err(parse(
                    format!("processing[{k}]"),
                    format!("expected {} entries, found {}", self.n, self.processing[k].len()),
                ));
            }
            if self.setup[k].len() != self.n + 1 {
                return Err(parse(
                    format!("setup[{k}]"),
                    format!(
                        "expected {} predecessor rows, found {}",
                        self.n + 1,
                        self.setup[k].len()
                    ),
                ));
            }
            for (i, row) in self.setup[k].iter().enumerate() {
                if row.len() != self.n {
                    return Err(parse(
                        format!("setup[{k}][{i}]"),
                        format!("expected {} entries, found {}", self.n, row.len()),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Checks every instance invariant and returns one diagnostic per violation.
///
/// Processing times of eligible pairs must be at least one time unit: the
/// pricing recurrence indexes states by completion time and needs every
/// transition to advance the clock.
pub fn validate(inst: &Instance) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    if inst.n == 0 {
        diags.push(Diagnostic::new("n", "instance must have at least one job"));
    }
    if inst.m == 0 {
        diags.push(Diagnostic::new("m", "instance must have at least one machine"));
    }
    if inst.check_shape().is_err() {
        diags.push(Diagnostic::new("tables", "table dimensions do not match n and m"));
        return diags;
    }
    for j in inst.jobs() {
        if inst.weight(j) < 1 {
            diags.push(Diagnostic::new(
                format!("job {j}"),
                "weight bound violated: w_j must be at least 1",
            ));
        }
        if !inst.machines().any(|k| inst.is_eligible(k, j)) {
            diags.push(Diagnostic::new(format!("job {j}"), "no eligible machine"));
        }
        for k in inst.machines() {
            if inst.is_eligible(k, j) && inst.processing(k, j) == 0 {
                diags.push(Diagnostic::new(
                    format!("job {j} on machine {k}"),
                    "processing time must be at least 1",
                ));
            }
        }
    }
    diags
}

/// Upper bound on the makespan of any acyclic schedule on any machine.
///
/// For each machine the bound adds, over its eligible jobs, the processing
/// time plus the largest setup from any possible predecessor; the maximum
/// over machines is returned.
pub fn horizon(inst: &Instance) -> u32 {
    inst.machines()
        .map(|k| {
            let elig = inst.eligible_jobs(k);
            elig.iter()
                .map(|&j| {
                    let worst_setup = std::iter::once(0)
                        .chain(elig.iter().copied().filter(|&i| i != j))
                        .map(|i| inst.setup(k, i, j))
                        .max()
                        .unwrap_or(0);
                    inst.processing(k, j) + worst_setup
                })
                .sum::<u32>()
        })
        .max()
        .unwrap_or(0)
}

/// Parameters of the seeded random instance generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n: usize,
    pub m: usize,
    pub processing: RangeInclusive<u32>,
    pub setup: RangeInclusive<u32>,
    pub weight: RangeInclusive<u32>,
    pub eligibility: f64,
    pub seed: u64,
}

impl GenConfig {
    /// Processing times in `10..=100`, setups in `0..=10`, weights in
    /// `1..=10`, and a 20% chance that a machine may process a given job.
    pub fn standard(n: usize, m: usize, seed: u64) -> Self {
        GenConfig {
            n,
            m,
            processing: 10..=100,
            setup: 0..=10,
            weight: 1..=10,
            eligibility: 0.2,
            seed,
        }
    }

    pub fn check(&self) -> Result<(), InstanceError> {
        let bad = |msg: String| Err(InstanceError::Config(msg));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        for (name, r) in [
            ("processing", &self.processing),
            ("setup", &self.setup),
            ("weight", &self.weight),
        ] {
            if r.is_empty() {
                return bad(format!("{name} range {r:?} is empty"));
            }
        }
        if *self.processing.start() < 1 {
            return bad("processing range must start at 1 or above".into());
        }
        if *self.weight.start() < 1 {
            return bad("weight range must start at 1 or above".into());
        }
        if !(self.eligibility > 0.0 && self.eligibility <= 1.0) {
            return bad(format!(
                "eligibility probability {} outside (0, 1]",
                self.eligibility
            ));
        }
        Ok(())
    }
}

/// Draws a random instance. Identical configs yield identical instances.
///
/// Jobs left without any eligible machine after independent sampling are
/// granted one machine drawn uniformly from the same stream.
pub fn generate(config: &GenConfig) -> Result<Instance, InstanceError> {
    config.check()?;
    let (n, m) = (config.n, config.m);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let weights: Vec<u32> = (0..n).map(|_| rng.gen_range(config.weight.clone())).collect();
    let mut eligible = vec![vec![false; n]; m];
    let mut processing = vec![vec![0; n]; m];
    let mut setup = vec![vec![vec![0; n]; n + 1]; m];
    for k in 0..m {
        for j in 0..n {
            eligible[k][j] = rng.gen_bool(config.eligibility);
            processing[k][j] = rng.gen_range(config.processing.clone());
            for i in 0..=n {
                if i != j + 1 {
                    setup[k][i][j] = rng.gen_range(config.setup.clone());
                }
            }
        }
    }
    for j in 0..n {
        if !(0..m).any(|k| eligible[k][j]) {
            let k = rng.gen_range(0..m);
            eligible[k][j] = true;
        }
    }
    Instance::from_parts(weights, eligible, processing, setup)
}
