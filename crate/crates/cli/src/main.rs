//! `idlink`: fabricate simulated chips, derive their keys, build and check
//! transfer records and ledgers, and run network scenarios.
//!
//! Exit status is 0 on success, 1 when a verification fails and 2 for usage
//! or input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use idlink::blockchain::{
    ledger_to_jsonl, merkle_root, mine_block_parallel, parse_ledger_jsonl, BlockChainState, ChainVerdict, Difficulty,
};
use idlink::chip_identity::{
    collision_probability_log10, emit_chip_dump, fabricate_run, information_quantity_log10, parse_chip_dump,
    read_chip_id, retention_experiment, AgingModel, CollisionMode, FabProcess, RetentionSeeds,
};
use idlink::keygen::{
    key_material_to_json, parse_key_file, public_key_to_json, sha256_concat, DerivationParams, Digest, KeyMaterial,
    Scheme, DEFAULT_PUBLIC_EXPONENT, DEFAULT_RSA_OFFSETS,
};
use idlink::netsim::{replay, run_scenario_logged, EventLog, ScenarioConfig, SimError, SimReport};
use idlink::transaction_chain::{
    make_genesis, parse_record_jsonl, record_to_jsonl, transfer, verify_history, HistoryVerdict, LogicalNode,
    TransferRecord,
};

#[derive(Parser)]
#[command(name = "idlink", version, about = "Chip-identity keys, transfer chains and ledgers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fabricate a run of chips and write one ID dump per chip.
    Fabricate(FabricateArgs),
    /// Derive a key pair from a chip ID dump.
    DeriveKeys(DeriveKeysArgs),
    /// Append a signed hand-off to a transfer record, creating it if needed.
    Transfer(TransferArgs),
    /// Bundle leaves into blocks and mine them onto a ledger.
    Mine(MineArgs),
    /// Verify a ledger or a transfer record.
    Verify(VerifyArgs),
    /// Edit one block of a ledger and report what re-mining costs.
    TamperDemo(TamperDemoArgs),
    /// Read, bake and re-read a chip run; count changed bits.
    Retention(RetentionArgs),
    /// Collision probability and information quantity for an ID width.
    Collision(CollisionArgs),
    /// Run a network scenario.
    Simulate(SimulateArgs),
    /// Re-execute a recorded event log and check it reproduces.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Rsa,
    Elgamal,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Rsa => Scheme::Rsa,
            SchemeArg::Elgamal => Scheme::Elgamal,
        }
    }
}

#[derive(Args)]
struct FabricateArgs {
    #[arg(long, default_value_t = 256)]
    id_bits: usize,
    #[arg(long)]
    count: u64,
    #[arg(long)]
    seed: u64,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DeriveKeysArgs {
    /// Chip ID dump.
    #[arg(long)]
    chip: PathBuf,
    #[arg(long, value_enum, default_value = "rsa")]
    scheme: SchemeArg,
    #[arg(long, default_value_t = DEFAULT_RSA_OFFSETS.0)]
    offset1: u64,
    #[arg(long, default_value_t = DEFAULT_RSA_OFFSETS.1)]
    offset2: u64,
    #[arg(long, default_value_t = DEFAULT_PUBLIC_EXPONENT)]
    e: u64,
    /// Leave p and q out of the written key file.
    #[arg(long)]
    erase_primes: bool,
    /// Key file with the secret half.
    #[arg(long)]
    out: PathBuf,
    /// Optional public-only key file.
    #[arg(long)]
    public_out: Option<PathBuf>,
}

#[derive(Args)]
struct TransferArgs {
    /// Transfer record; a new record starts from the sender's genesis unit.
    #[arg(long)]
    record: PathBuf,
    /// Key file of the current holder, with its secret key.
    #[arg(long)]
    from: PathBuf,
    /// Key file of the recipient; only the public key is read.
    #[arg(long)]
    to: PathBuf,
}

#[derive(Args)]
struct MineArgs {
    /// Ledger to extend; a new one is started if absent.
    #[arg(long)]
    ledger: Option<PathBuf>,
    /// Use the unit hashes of a transfer record as leaves.
    #[arg(long, conflicts_with = "synthetic_leaves", required_unless_present = "synthetic_leaves")]
    record: Option<PathBuf>,
    /// Use this many seeded pseudo-random leaves.
    #[arg(long)]
    synthetic_leaves: Option<u64>,
    #[arg(long, default_value_t = 256)]
    bundle_size: usize,
    /// Leading zero bits; ignored when extending a ledger.
    #[arg(long, default_value_t = 12)]
    difficulty: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "input")]
struct VerifyArgs {
    #[arg(long, group = "input")]
    chain: Option<PathBuf>,
    #[arg(long, group = "input")]
    record: Option<PathBuf>,
}

#[derive(Args)]
struct TamperDemoArgs {
    #[arg(long)]
    chain: PathBuf,
    /// Block to edit.
    #[arg(long)]
    index: usize,
    /// Leaf of that block's bundle to edit.
    #[arg(long, default_value_t = 0)]
    leaf: usize,
    /// Bit of the leaf to flip.
    #[arg(long, default_value_t = 0)]
    bit: usize,
    /// Write the edited ledger without re-mining.
    #[arg(long)]
    write_tampered: Option<PathBuf>,
    /// Write the edited and re-mined ledger.
    #[arg(long)]
    write_repaired: Option<PathBuf>,
}

#[derive(Args)]
struct RetentionArgs {
    #[arg(long, default_value_t = 1116)]
    chips: u64,
    #[arg(long, default_value_t = 256)]
    id_bits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-bit flip probability of a stable cell during the bake.
    #[arg(long, default_value_t = 0.0)]
    flip_probability: f64,
    /// Per-read probability that a bit reads correctly.
    #[arg(long, default_value_t = 1.0)]
    stability: f64,
    #[arg(long, default_value_t = 125.0)]
    temp: f64,
    #[arg(long, default_value_t = 168.0)]
    hours: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Linear,
    Birthday,
}

#[derive(Args)]
struct CollisionArgs {
    #[arg(long)]
    id_bits: u64,
    /// Population size; scientific notation such as 1e12 is accepted.
    #[arg(long, value_parser = parse_count)]
    chips: u64,
    #[arg(long, value_enum, default_value = "linear")]
    mode: ModeArg,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario config JSON.
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario: iot or ssd-controller.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    difficulty: Option<u32>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long)]
    devices: Option<u64>,
    #[arg(long)]
    transactions: Option<u64>,
    #[arg(long)]
    bundle_size: Option<u64>,
    #[arg(long)]
    spoofs: Option<u64>,
    #[arg(long)]
    tampers: Option<u64>,
    /// Report JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Event log JSON-lines.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    log: PathBuf,
    /// Config to replay against; defaults to the one in the log header.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Distinguishes a completed check that failed from an error.
enum Status {
    Ok,
    Failed,
}

fn parse_count(text: &str) -> Result<u64, String> {
    if let Ok(n) = text.parse::<u64>() {
        return Ok(n);
    }
    let f: f64 = text.parse().map_err(|_| format!("not a count: {text}"))?;
    if f.fract() != 0.0 || !(0.0..=u64::MAX as f64).contains(&f) {
        return Err(format!("not a whole count: {text}"));
    }
    Ok(f as u64)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn fabricate(args: FabricateArgs) -> Result<Status> {
    let process = FabProcess::new(args.id_bits, args.seed)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for chip in fabricate_run(&process, args.count)? {
        let id = read_chip_id(&chip, &process, args.seed);
        let path = args.out.join(format!("chip-{:04}.txt", chip.chip_index()));
        write(&path, &emit_chip_dump(&id))?;
        println!("{}", path.display());
    }
    Ok(Status::Ok)
}

fn derive_keys(args: DeriveKeysArgs) -> Result<Status> {
    let id = parse_chip_dump(&read(&args.chip)?).with_context(|| format!("parsing {}", args.chip.display()))?;
    let params = match args.scheme {
        SchemeArg::Rsa => DerivationParams::Rsa {
            offset1: args.offset1,
            offset2: args.offset2,
            e: args.e,
        },
        SchemeArg::Elgamal => DerivationParams::elgamal_default(),
    };
    let mut key = params.derive(&id)?;
    if args.erase_primes {
        match &mut key {
            KeyMaterial::Rsa(k) => k.erase_primes(),
            KeyMaterial::Elgamal(_) => bail!("--erase-primes only applies to rsa keys"),
        }
    }
    write(&args.out, &key_material_to_json(&key))?;
    if let Some(path) = &args.public_out {
        write(path, &public_key_to_json(&key.public_key()))?;
    }
    println!("fingerprint={}", key.public_key().fingerprint());
    Ok(Status::Ok)
}

fn transfer_cmd(args: TransferArgs) -> Result<Status> {
    let sender = parse_key_file(&read(&args.from)?)?
        .key_material
        .context("sender key file has no secret key")?;
    let recipient = parse_key_file(&read(&args.to)?)?.public_key;
    let mut record = if args.record.exists() {
        parse_record_jsonl(&read(&args.record)?)?
    } else {
        TransferRecord::new(make_genesis(&sender)?.unit)
    };
    let latest = record.latest().context("record is empty")?.clone();
    if latest.public_key != sender.public_key() {
        bail!("sender does not hold the latest unit of the record");
    }
    let node = LogicalNode {
        unit: latest,
        secret_key: sender.secret_key(),
    };
    record.push(transfer(&node, &recipient)?);
    write(&args.record, &record_to_jsonl(&record))?;
    println!("hops={}", record.len() - 1);
    Ok(Status::Ok)
}

fn mine(args: MineArgs) -> Result<Status> {
    if args.bundle_size == 0 {
        bail!("--bundle-size must be at least 1");
    }
    let mut ledger = match &args.ledger {
        Some(path) => parse_ledger_jsonl(&read(path)?)?,
        None => BlockChainState::new(Difficulty::new(args.difficulty)?),
    };
    let leaves: Vec<Digest> = match (&args.record, args.synthetic_leaves) {
        (Some(path), _) => parse_record_jsonl(&read(path)?)?
            .units
            .iter()
            .map(idlink::transaction_chain::unit_hash)
            .collect(),
        (None, Some(n)) => (0..n)
            .map(|i| sha256_concat(&[b"synthetic-leaf", &args.seed.to_be_bytes(), &i.to_be_bytes()]))
            .collect(),
        (None, None) => unreachable!("clap requires one leaf source"),
    };
    if leaves.is_empty() {
        bail!("no leaves to mine");
    }
    let mut total = 0u64;
    for bundle in leaves.chunks(args.bundle_size) {
        let root = merkle_root(bundle)?;
        let mined = mine_block_parallel(root, ledger.tip_hash(), ledger.difficulty, 0, args.threads)?;
        println!("block={} nonce={} attempts={}", ledger.len(), mined.block.nonce, mined.attempts);
        total += mined.attempts;
        ledger.blocks.push(mined.block);
        ledger.bundles.push(bundle.to_vec());
    }
    write(&args.out, &ledger_to_jsonl(&ledger))?;
    println!("blocks={} total_hash_attempts={total}", ledger.len());
    Ok(Status::Ok)
}

fn report_chain(verdict: ChainVerdict, blocks: usize) -> Status {
    match verdict {
        ChainVerdict::Valid => {
            println!("valid blocks={blocks}");
            Status::Ok
        }
        ChainVerdict::FirstBad { index, fault } => {
            println!("invalid first_bad_block={index} fault={fault:?}");
            Status::Failed
        }
    }
}

fn verify_cmd(args: VerifyArgs) -> Result<Status> {
    if let Some(path) = &args.chain {
        let ledger = parse_ledger_jsonl(&read(path)?)?;
        return Ok(report_chain(ledger.verify_all(), ledger.len()));
    }
    let path = args.record.as_ref().expect("clap requires one input");
    let record = parse_record_jsonl(&read(path)?)?;
    Ok(match verify_history(&record)? {
        HistoryVerdict::Valid => {
            println!("valid hops={}", record.len() - 1);
            Status::Ok
        }
        HistoryVerdict::FirstBad { index, fault } => {
            println!("invalid first_bad_hop={index} fault={fault:?}");
            Status::Failed
        }
    })
}

fn tamper_demo(args: TamperDemoArgs) -> Result<Status> {
    let ledger = parse_ledger_jsonl(&read(&args.chain)?)?;
    if args.index >= ledger.len() {
        bail!("--index {} out of range for {} blocks", args.index, ledger.len());
    }
    let mut bundle = ledger.bundles[args.index].clone();
    let leaf = bundle
        .get_mut(args.leaf)
        .with_context(|| format!("--leaf {} out of range", args.leaf))?;
    if args.bit >= 256 {
        bail!("--bit must be below 256");
    }
    *leaf = leaf.with_bit_flipped(args.bit);
    let new_root = merkle_root(&bundle)?;

    let mut tampered = ledger.clone();
    tampered.blocks[args.index].merkle_root = new_root;
    tampered.bundles[args.index] = bundle.clone();
    let (mut repaired, cost) = ledger.tamper_and_repair(args.index, new_root)?;
    repaired.bundles[args.index] = bundle;

    println!("tampered_index={}", cost.tampered_index);
    println!("blocks_remined={}", cost.blocks_remined);
    println!("total_hash_attempts={}", cost.total_hash_attempts);
    let per_block: Vec<String> = cost.per_block_attempts.iter().map(u64::to_string).collect();
    println!("per_block_attempts={}", per_block.join(","));
    match tampered.validate_chain().first_bad_block() {
        Some(i) => println!("unrepaired_first_bad_block={i}"),
        None => println!("unrepaired_first_bad_block=none"),
    }
    let moved = ledger
        .block_hashes()
        .iter()
        .zip(repaired.block_hashes())
        .position(|(a, b)| *a != b);
    match moved {
        Some(i) => println!("repaired_first_changed_hash={i}"),
        None => println!("repaired_first_changed_hash=none"),
    }
    if let Some(path) = &args.write_tampered {
        write(path, &ledger_to_jsonl(&tampered))?;
    }
    if let Some(path) = &args.write_repaired {
        write(path, &ledger_to_jsonl(&repaired))?;
    }
    Ok(Status::Ok)
}

fn retention(args: RetentionArgs) -> Result<Status> {
    let process = FabProcess::new(args.id_bits, args.seed)?.with_stability(args.stability)?;
    let model = AgingModel::new(args.temp, args.hours)?.with_flip_probability(args.flip_probability)?;
    let seeds = RetentionSeeds {
        read_before: args.seed,
        age: args.seed.wrapping_add(1),
        read_after: args.seed.wrapping_add(2),
    };
    let report = retention_experiment(&process, args.chips, &model, seeds)?;
    println!("chips={}", args.chips);
    println!("inconsistent_chips={}", report.inconsistent_chips);
    println!("total_mismatched_bits={}", report.total_mismatched_bits);
    Ok(Status::Ok)
}

fn collision(args: CollisionArgs) -> Result<Status> {
    let mode = match args.mode {
        ModeArg::Linear => CollisionMode::Linear,
        ModeArg::Birthday => CollisionMode::Birthday,
    };
    let p = collision_probability_log10(args.id_bits, args.chips, mode)?;
    let info = information_quantity_log10(args.id_bits)?;
    println!("log10_collision_probability={p:.2}");
    println!("log10_information_quantity={info:.2}");
    Ok(Status::Ok)
}

fn scenario_config(args: &SimulateArgs) -> Result<ScenarioConfig> {
    let mut config = match (&args.config, &args.scenario) {
        (Some(path), _) => serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?,
        (None, Some(name)) => ScenarioConfig::named(name).with_context(|| format!("unknown scenario {name}"))?,
        (None, None) => ScenarioConfig::default(),
    };
    let overrides = [
        (args.seed, &mut config.master_seed),
        (args.devices, &mut config.n_devices),
        (args.transactions, &mut config.n_transactions),
        (args.bundle_size, &mut config.bundle_size),
        (args.spoofs, &mut config.attack_mix.spoof_attempts),
        (args.tampers, &mut config.attack_mix.tamper_attempts),
    ];
    for (value, slot) in overrides {
        if let Some(v) = value {
            *slot = v;
        }
    }
    if let Some(d) = args.difficulty {
        config.difficulty_bits = d;
    }
    if let Some(s) = args.scheme {
        config.scheme = s.into();
    }
    Ok(config)
}

fn protection_held(report: &SimReport) -> bool {
    let m = &report.metrics;
    m.spoofs_accepted == 0 && m.tampers_detected == m.tampers_attempted
}

fn simulate(args: SimulateArgs) -> Result<Status> {
    let config = scenario_config(&args)?;
    let (report, log) = run_scenario_logged(&config)?;
    if let Some(path) = &args.log {
        write(path, &log.to_jsonl())?;
    }
    if let Some(path) = &args.report {
        write(path, &report.to_json())?;
    }
    print!("{}", report.summary_table());
    Ok(if protection_held(&report) { Status::Ok } else { Status::Failed })
}

fn replay_cmd(args: ReplayArgs) -> Result<Status> {
    let text = read(&args.log)?;
    let config = match &args.config {
        Some(path) => serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?,
        None => match EventLog::parse(&text) {
            Ok(log) => log.config,
            Err(e) => return replay_failure(e),
        },
    };
    match replay(&config, &text) {
        Ok(report) => {
            if let Some(path) = &args.report {
                write(path, &report.to_json())?;
            }
            print!("{}", report.summary_table());
            println!("replay=identical");
            Ok(Status::Ok)
        }
        Err(e) => replay_failure(e),
    }
}

fn replay_failure(e: SimError) -> Result<Status> {
    match e {
        SimError::Truncated(_)
        | SimError::Corrupted { .. }
        | SimError::Diverged { .. }
        | SimError::ReportMismatch
        | SimError::ConfigMismatch => {
            println!("replay=failed: {e}");
            Ok(Status::Failed)
        }
        other => Err(other.into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fabricate(a) => fabricate(a),
        Command::DeriveKeys(a) => derive_keys(a),
        Command::Transfer(a) => transfer_cmd(a),
        Command::Mine(a) => mine(a),
        Command::Verify(a) => verify_cmd(a),
        Command::TamperDemo(a) => tamper_demo(a),
        Command::Retention(a) => retention(a),
        Command::Collision(a) => collision(a),
        Command::Simulate(a) => simulate(a),
        Command::Replay(a) => replay_cmd(a),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
