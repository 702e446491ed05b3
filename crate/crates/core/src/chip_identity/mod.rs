//! Simulated identification chips.
//!
//! A fabrication run draws one latent identification bitstring per chip from
//! a seeded stream, so the same `(fab_seed, chip_index)` always yields the
//! same chip. Readout and accelerated aging are modelled as independent
//! per-bit flips; both default to zero error.

mod dump;
mod stats;

use rand::Rng;
use thiserror::Error;

use crate::bits::BitString;
use crate::seed;

pub use dump::{emit_chip_dump, parse_chip_dump, DUMP_LINE_WIDTH};
pub use stats::{collision_probability_log10, information_quantity_log10, CollisionMode};

/// Smallest identification length a process may be configured with.
pub const MIN_ID_BITS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChipError {
    #[error("fabrication run must produce at least one chip")]
    EmptyRun,
    #[error("id_bits must be at least {MIN_ID_BITS}, got {0}")]
    IdTooShort(usize),
    #[error("{name} must lie in [0, 1], got {value}")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },
    #[error("aging duration must be positive, got {0} hours")]
    NonPositiveDuration(f64),
    #[error("collision statistics need at least two chips, got {0}")]
    DegeneratePopulation(u64),
    #[error("information quantity needs at least one bit")]
    ZeroBits,
    #[error("chip dump line {line}, column {column}: unexpected {found:?}")]
    DumpSyntax {
        line: usize,
        column: usize,
        found: char,
    },
    #[error("chip dump contains no bits")]
    EmptyDump,
}

/// Parameters of a (simulated) manufacturing line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FabProcess {
    id_bits: usize,
    fab_seed: u64,
    stability: f64,
}

impl FabProcess {
    /// A zero-noise process: every read reproduces the latent ID exactly.
    pub fn new(id_bits: usize, fab_seed: u64) -> Result<Self, ChipError> {
        if id_bits < MIN_ID_BITS {
            return Err(ChipError::IdTooShort(id_bits));
        }
        Ok(Self {
            id_bits,
            fab_seed,
            stability: 1.0,
        })
    }

    /// Sets the per-bit probability that a read reports the latent bit.
    pub fn with_stability(mut self, stability: f64) -> Result<Self, ChipError> {
        check_probability("stability", stability)?;
        self.stability = stability;
        Ok(self)
    }

    pub fn id_bits(&self) -> usize {
        self.id_bits
    }

    pub fn fab_seed(&self) -> u64 {
        self.fab_seed
    }

    pub fn stability(&self) -> f64 {
        self.stability
    }
}

/// One fabricated chip and its stress history.
#[derive(Debug, Clone, PartialEq)]
pub struct Chip {
    chip_index: u64,
    true_id: BitString,
    aging_hours: f64,
    aging_temp_c: f64,
}

impl Chip {
    pub fn chip_index(&self) -> u64 {
        self.chip_index
    }

    /// The latent physical randomness. Only the simulator can see this; real
    /// callers observe it through [`read_chip_id`].
    pub fn true_id(&self) -> &BitString {
        &self.true_id
    }

    pub fn aging_hours(&self) -> f64 {
        self.aging_hours
    }

    pub fn aging_temp_c(&self) -> f64 {
        self.aging_temp_c
    }
}

/// A readout of a chip's identification code.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChipId {
    pub bits: BitString,
}

impl ChipId {
    pub fn new(bits: BitString) -> Self {
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// An accelerated-aging stress condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgingModel {
    temp_c: f64,
    duration_hours: f64,
    flip_probability: f64,
}

impl AgingModel {
    /// A bake that leaves every ID bit intact.
    pub fn new(temp_c: f64, duration_hours: f64) -> Result<Self, ChipError> {
        if duration_hours.is_nan() || duration_hours <= 0.0 {
            return Err(ChipError::NonPositiveDuration(duration_hours));
        }
        Ok(Self {
            temp_c,
            duration_hours,
            flip_probability: 0.0,
        })
    }

    /// 125 °C for 168 hours, the ten-year retention equivalent.
    pub fn standard_bake() -> Self {
        Self {
            temp_c: 125.0,
            duration_hours: 168.0,
            flip_probability: 0.0,
        }
    }

    pub fn with_flip_probability(mut self, p: f64) -> Result<Self, ChipError> {
        check_probability("flip_probability", p)?;
        self.flip_probability = p;
        Ok(self)
    }

    pub fn temp_c(&self) -> f64 {
        self.temp_c
    }

    pub fn duration_hours(&self) -> f64 {
        self.duration_hours
    }

    pub fn flip_probability(&self) -> f64 {
        self.flip_probability
    }
}

fn check_probability(name: &'static str, value: f64) -> Result<(), ChipError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ChipError::ProbabilityOutOfRange { name, value })
    }
}

/// Flips each bit independently with probability `p`.
fn flip_bits<R: Rng>(bits: &BitString, p: f64, rng: &mut R) -> BitString {
    if p == 0.0 {
        return bits.clone();
    }
    if p == 1.0 {
        return bits.complement();
    }
    let mut out = bits.clone();
    for i in 0..out.len() {
        if rng.gen_bool(p) {
            out.flip(i);
        }
    }
    out
}

/// Fabricates chips `0..count` of a run.
pub fn fabricate_run(process: &FabProcess, count: u64) -> Result<Vec<Chip>, ChipError> {
    if count == 0 {
        return Err(ChipError::EmptyRun);
    }
    Ok((0..count).map(|i| fabricate_chip(process, i)).collect())
}

/// Fabricates the single chip at `chip_index`; identical to the
/// corresponding element of [`fabricate_run`].
pub fn fabricate_chip(process: &FabProcess, chip_index: u64) -> Chip {
    let mut rng = seed::stream("fab", &[process.fab_seed, chip_index]);
    Chip {
        chip_index,
        true_id: BitString::random(&mut rng, process.id_bits),
        aging_hours: 0.0,
        aging_temp_c: 0.0,
    }
}

/// Reads a chip's ID; each bit is reported faithfully with probability
/// `process.stability()`.
pub fn read_chip_id(chip: &Chip, process: &FabProcess, read_seed: u64) -> ChipId {
    let mut rng = seed::stream("read", &[read_seed, chip.chip_index]);
    ChipId::new(flip_bits(&chip.true_id, 1.0 - process.stability, &mut rng))
}

/// Returns the chip after the stress `model`.
pub fn apply_aging(chip: &Chip, model: &AgingModel, age_seed: u64) -> Chip {
    let mut rng = seed::stream("age", &[age_seed, chip.chip_index]);
    Chip {
        chip_index: chip.chip_index,
        true_id: flip_bits(&chip.true_id, model.flip_probability, &mut rng),
        aging_hours: chip.aging_hours + model.duration_hours,
        aging_temp_c: model.temp_c,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RetentionSeeds {
    pub read_before: u64,
    pub age: u64,
    pub read_after: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetentionReport {
    /// Bit mismatches between the pre- and post-stress reads, per chip.
    pub mismatches: Vec<usize>,
    pub inconsistent_chips: usize,
    pub total_mismatched_bits: usize,
}

/// Read, bake, read again, and count the bits that changed.
pub fn retention_experiment(
    process: &FabProcess,
    n_chips: u64,
    model: &AgingModel,
    seeds: RetentionSeeds,
) -> Result<RetentionReport, ChipError> {
    let chips = fabricate_run(process, n_chips)?;
    let mismatches: Vec<usize> = chips
        .iter()
        .map(|chip| {
            let before = read_chip_id(chip, process, seeds.read_before);
            let aged = apply_aging(chip, model, seeds.age);
            let after = read_chip_id(&aged, process, seeds.read_after);
            before.bits.hamming_distance(&after.bits)
        })
        .collect();
    Ok(RetentionReport {
        inconsistent_chips: mismatches.iter().filter(|&&m| m > 0).count(),
        total_mismatched_bits: mismatches.iter().sum(),
        mismatches,
    })
}
