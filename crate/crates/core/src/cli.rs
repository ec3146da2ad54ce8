//! Command-line front end: `solve`, `check`, `gen` and `compare`. Every command prints a
//! JSON report on stdout and failures as a JSON diagnostic on stderr.

use crate::arena::{parse_arena, random_arena, Arena, Lasso};
use crate::de_perfect::{decide_de_with_regions, retaliation_regions, PivotPath};
use crate::imperfect::{decide_de_imperfect, parse_observations, verify_lasso, ImperfectError};
use crate::objectives::{parse_objectives, random_profile, ObjClass, Objective, Profile};
use crate::oracle::reductions::{
    gen_buchi_reduction, gen_conj_parity_reduction, gen_disj_parity_reduction, gen_multireach_to_safety,
    random_reduction, ReductionInstance, ReductionKind,
};
use crate::oracle::{brute_de, max_states, random_instance};
use crate::witness::{check_witness, synthesis_supported, synthesize_profile, DoomsdayWitness, WitnessReport};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_UNSUPPORTED: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "doomsday", version, about = "Decide, synthesize and verify doomsday equilibria")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether a doomsday equilibrium exists (exit 0 yes, 1 no).
    Solve(SolveArgs),
    /// Verify a witness file (exit 0 pass, 1 fail, 2 malformed).
    Check(CheckArgs),
    /// Generate a random instance or a reduction instance.
    Gen(GenArgs),
    /// Differential suite: solver against the brute-force oracle.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    pub arena: PathBuf,
    pub objectives: PathBuf,
    /// Include the synthesized witness in the report.
    #[arg(long)]
    pub witness: bool,
    /// Model-check the witness; exit 3 if it fails.
    #[arg(long)]
    pub verify: bool,
    /// Observation partitions for imperfect information.
    #[arg(long, value_name = "OBS")]
    pub imperfect: Option<PathBuf>,
    /// Also write the report to this file.
    #[arg(long, value_name = "OUT")]
    pub json: Option<PathBuf>,
    /// Omit timings so reports are byte-identical across runs.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub arena: PathBuf,
    pub objectives: PathBuf,
    pub witness: PathBuf,
    #[arg(long, value_name = "OUT")]
    pub json: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    Random,
    BuchiRed,
    ConjParityRed,
    DisjParityRed,
    MultireachRed,
}

impl GenKind {
    fn reduction(self) -> Option<ReductionKind> {
        match self {
            GenKind::Random => None,
            GenKind::BuchiRed => Some(ReductionKind::Buchi),
            GenKind::ConjParityRed => Some(ReductionKind::ConjParity),
            GenKind::DisjParityRed => Some(ReductionKind::DisjParity),
            GenKind::MultireachRed => Some(ReductionKind::MultiReach),
        }
    }
}

#[derive(Args, Debug)]
pub struct GenArgs {
    pub kind: GenKind,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 6)]
    pub states: usize,
    #[arg(long, default_value_t = 3)]
    pub players: usize,
    #[arg(long, default_value_t = 2)]
    pub actions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Objective class of random instances.
    #[arg(long, default_value = "safety")]
    pub class: String,
    /// Largest priority of random parity objectives.
    #[arg(long, default_value_t = 3)]
    pub max_priority: u32,
    /// Number of reachability targets of the multi-reachability source game.
    #[arg(long, default_value_t = 2)]
    pub targets: usize,
    /// Reduce this two-player source game instead of a random one.
    #[arg(long, requires = "source_objectives")]
    pub source: Option<PathBuf>,
    /// Source objectives: one Büchi set, two parity functions, or reachability targets.
    #[arg(long, requires = "source")]
    pub source_objectives: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Instances per class.
    #[arg(long, default_value_t = 500)]
    pub count: usize,
    /// Instances for parity (defaults to `count`).
    #[arg(long)]
    pub parity_count: Option<usize>,
    #[arg(long, default_value_t = 6)]
    pub max_states: usize,
    #[arg(long, default_value_t = 4)]
    pub parity_max_states: usize,
    #[arg(long, default_value_t = 3)]
    pub players: usize,
    #[arg(long, default_value_t = 2)]
    pub actions: usize,
    #[arg(long, value_delimiter = ',', default_value = "safety,reach,buchi,cobuchi,parity")]
    pub classes: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also synthesize and check a witness on every positive instance.
    #[arg(long)]
    pub verify: bool,
    /// Directory receiving mismatching instances.
    #[arg(long, default_value = "mismatches")]
    pub dump: PathBuf,
    #[arg(long, value_name = "OUT")]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub no_timing: bool,
}

/// A failure reported as `{"error": kind, "message": ...}` with an exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

impl Failure {
    fn new(code: i32, kind: &str, message: impl Into<String>) -> Self {
        Failure { code, kind: kind.to_string(), message: message.into() }
    }

    /// Uses the error's variant name as the kind.
    fn from_err(code: i32, e: &impl std::error::Error) -> Self {
        let dbg = format!("{e:?}");
        let kind: String = dbg.chars().take_while(|c| c.is_alphanumeric()).collect();
        Failure::new(code, &kind, e.to_string())
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::new(EXIT_ERROR, "Io", format!("{}: {e}", path.display()))
    }
}

type CmdResult = Result<(i32, String), Failure>;

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Check(a) => cmd_check(&a),
        Command::Gen(a) => cmd_gen(&a),
        Command::Compare(a) => cmd_compare(&a),
    };
    match result {
        Ok((code, report)) => {
            print!("{report}");
            code
        }
        Err(f) => {
            let doc = serde_json::json!({ "error": f.kind, "message": f.message });
            eprintln!("{doc}");
            f.code
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::io(path, e))
}

fn load(arena: &Path, objectives: &Path) -> Result<(Arena, Profile, Vec<String>), Failure> {
    let at = read(arena)?;
    let a = parse_arena(&at).map_err(|e| Failure::from_err(EXIT_ERROR, &e))?;
    let ot = read(objectives)?;
    let p = parse_objectives(&ot, &a).map_err(|e| Failure::from_err(EXIT_ERROR, &e))?;
    Ok((a, p, vec![at, ot]))
}

/// SHA-256 over the input documents, separated by NUL bytes.
pub fn digest(docs: &[String]) -> String {
    let mut h = Sha256::new();
    for (k, d) in docs.iter().enumerate() {
        if k > 0 {
            h.update([0u8]);
        }
        h.update(d.as_bytes());
    }
    let mut out = String::with_capacity(64);
    for b in h.finalize() {
        let _ = write!(out, "{b:02x}");
    }
    out
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

fn emit(report: &impl Serialize, out: Option<&Path>) -> Result<String, Failure> {
    let text = to_json(report);
    if let Some(path) = out {
        write(path, &text)?;
    }
    Ok(text)
}

#[derive(Serialize, Default)]
pub struct Timing {
    phases: BTreeMap<&'static str, f64>,
    #[serde(skip)]
    enabled: bool,
}

impl Timing {
    fn new(enabled: bool) -> Self {
        Timing { phases: BTreeMap::new(), enabled }
    }

    fn time<R>(&mut self, phase: &'static str, f: impl FnOnce() -> R) -> R {
        let t = Instant::now();
        let r = f();
        if self.enabled {
            *self.phases.entry(phase).or_default() += t.elapsed().as_secs_f64() * 1e3;
        }
        r
    }

    fn report(self) -> Option<BTreeMap<&'static str, f64>> {
        self.enabled.then_some(self.phases)
    }
}

#[derive(Serialize)]
pub struct Verification {
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<WitnessReport>,
}

#[derive(Serialize)]
pub struct SolveReport {
    pub digest: String,
    pub class: String,
    pub imperfect: bool,
    pub exists: bool,
    /// Retaliation region of each player (perfect information only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regions: Option<Vec<Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lasso: Option<Lasso>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pivot_path: Option<PivotPath>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<DoomsdayWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    #[serde(rename = "timing_ms", skip_serializing_if = "Option::is_none")]
    pub timing: Option<BTreeMap<&'static str, f64>>,
}

pub fn cmd_solve(args: &SolveArgs) -> CmdResult {
    let (a, p, mut docs) = load(&args.arena, &args.objectives)?;
    let mut timing = Timing::new(!args.no_timing);
    let mut report = SolveReport {
        digest: String::new(),
        class: p.class().to_string(),
        imperfect: args.imperfect.is_some(),
        exists: false,
        regions: None,
        lasso: None,
        pivot_path: None,
        witness: None,
        verification: None,
        timing: None,
    };
    if let Some(obs_path) = &args.imperfect {
        if p.class().is_tail() {
            let e = ImperfectError::UnsupportedClass(p.class());
            return Err(Failure::from_err(EXIT_UNSUPPORTED, &e));
        }
        let ot = read(obs_path)?;
        let ia = parse_observations(&ot, a).map_err(|e| Failure::from_err(EXIT_ERROR, &e))?;
        docs.push(ot);
        let d = timing
            .time("emptiness", || decide_de_imperfect(&ia, &p))
            .map_err(|e| Failure::from_err(EXIT_UNSUPPORTED, &e))?;
        report.exists = d.exists;
        report.lasso = d.witness_lasso.clone();
        if args.verify && d.exists {
            let lasso = d.witness_lasso.as_ref().expect("positive decisions carry a lasso");
            let ok = timing
                .time("verification", || verify_lasso(&ia, &p, lasso))
                .map_err(|e| Failure::from_err(EXIT_ERROR, &e))?;
            report.verification = Some(Verification { passed: ok, report: None });
        }
    } else {
        let regions = timing
            .time("regions", || retaliation_regions(&a, &p))
            .map_err(|e| Failure::from_err(EXIT_ERROR, &e))?;
        let d = timing.time("emptiness", || decide_de_with_regions(&a, &p, regions));
        report.exists = d.exists;
        report.regions = Some(d.regions.iter().map(|r| r.to_vec()).collect());
        report.lasso = d.witness_lasso.clone();
        report.pivot_path = d.witness_path.clone();
        if d.exists && (args.witness || args.verify) {
            if !synthesis_supported(&a, &p) {
                let msg = format!("no witness synthesis for {} arenas of {} states", p.class(), a.n_states());
                if args.verify {
                    return Err(Failure::new(EXIT_VERIFY, "SynthesisUnsupported", msg));
                }
            } else {
                let w = timing
                    .time("synthesis", || synthesize_profile(&a, &p, &d))
                    .map_err(|e| Failure::from_err(EXIT_VERIFY, &e))?;
                if args.verify {
                    let r = timing
                        .time("verification", || check_witness(&a, &p, &w))
                        .map_err(|e| Failure::from_err(EXIT_VERIFY, &e))?;
                    report.verification = Some(Verification { passed: r.passed(), report: Some(r) });
                }
                if args.witness {
                    report.witness = Some(w);
                }
            }
        }
    }
    report.digest = digest(&docs);
    report.timing = timing.report();
    let text = emit(&report, args.json.as_deref())?;
    if report.verification.as_ref().is_some_and(|v| !v.passed) {
        eprintln!("{}", serde_json::json!({ "error": "VerificationFailed", "message": "witness failed verification" }));
        return Ok((EXIT_VERIFY, text));
    }
    Ok((if report.exists { EXIT_OK } else { EXIT_NO }, text))
}

#[derive(Serialize)]
struct CheckReport {
    digest: String,
    passed: bool,
    #[serde(flatten)]
    report: WitnessReport,
}

pub fn cmd_check(args: &CheckArgs) -> CmdResult {
    let (a, p, mut docs) = load(&args.arena, &args.objectives)?;
    let wt = read(&args.witness)?;
    let w = DoomsdayWitness::from_json(&wt).map_err(|e| Failure::from_err(EXIT_ERROR, &e))?;
    docs.push(wt);
    let r = check_witness(&a, &p, &w).map_err(|e| Failure::from_err(EXIT_ERROR, &e))?;
    let passed = r.passed();
    let text = emit(&CheckReport { digest: digest(&docs), passed, report: r }, args.json.as_deref())?;
    Ok((if passed { EXIT_OK } else { EXIT_NO }, text))
}

fn bad_params(msg: impl Into<String>) -> Failure {
    Failure::new(EXIT_ERROR, "BadParams", msg)
}

fn reduce_source(kind: ReductionKind, src: &Arena, obj: &Profile) -> Result<ReductionInstance, Failure> {
    if src.n_players() != 2 {
        return Err(bad_params("source games have two players"));
    }
    let parity = |k: usize| -> Result<&[u32], Failure> {
        match obj.objectives().get(k) {
            Some(Objective::Parity(pr)) => Ok(pr),
            _ => Err(bad_params("parity reductions need two parity functions")),
        }
    };
    match kind {
        ReductionKind::Buchi => match obj.objectives() {
            [Objective::Buchi(t), ..] => Ok(gen_buchi_reduction(src, t)),
            _ => Err(bad_params("the Büchi reduction needs a Büchi objective")),
        },
        ReductionKind::ConjParity => Ok(gen_conj_parity_reduction(src, parity(0)?, parity(1)?)),
        ReductionKind::DisjParity => Ok(gen_disj_parity_reduction(src, parity(0)?, parity(1)?)),
        ReductionKind::MultiReach => {
            if obj.class() != ObjClass::Reach {
                return Err(bad_params("the multi-reachability reduction needs reachability targets"));
            }
            let ts: Vec<_> = (0..obj.n_players()).map(|k| obj.target(k).clone()).collect();
            gen_multireach_to_safety(src, &ts).map_err(|e| Failure::from_err(EXIT_ERROR, &e))
        }
    }
}

pub fn cmd_gen(args: &GenArgs) -> CmdResult {
    std::fs::create_dir_all(&args.out).map_err(|e| Failure::io(&args.out, e))?;
    let mut files = Vec::new();
    let mut put = |name: &str, text: String| -> Result<(), Failure> {
        let path = args.out.join(name);
        write(&path, &text)?;
        files.push(path.display().to_string());
        Ok(())
    };
    let mut expected = None;
    match args.kind.reduction() {
        None => {
            let class = ObjClass::parse(&args.class).map_err(|e| Failure::from_err(EXIT_ERROR, &e))?;
            let a = random_arena(args.states, args.players, args.actions, args.seed)
                .map_err(|e| Failure::from_err(EXIT_ERROR, &e))?;
            let p = random_profile(class, args.states, args.players, args.max_priority, args.seed ^ 0x0b1ec7);
            put("arena.json", a.to_json())?;
            put("objectives.json", p.to_json())?;
        }
        Some(kind) => {
            let r = match (&args.source, &args.source_objectives) {
                (Some(sa), Some(so)) => {
                    let (src, obj, _) = load(sa, so)?;
                    reduce_source(kind, &src, &obj)?
                }
                _ => {
                    if args.states == 0 {
                        return Err(bad_params("source games need at least one state"));
                    }
                    random_reduction(kind, args.states, args.targets, args.seed)
                }
            };
            put("arena.json", r.arena.to_json())?;
            put("objectives.json", r.profile.to_json())?;
            put("source_arena.json", r.source.to_json())?;
            put("source_objectives.json", r.source_objectives.to_json())?;
            let doc = serde_json::json!({ "kind": kind.name(), "source_winner_a": r.expected, "expected_de": r.expected });
            put("expected.json", to_json(&doc))?;
            expected = Some(r.expected);
        }
    }
    let summary = serde_json::json!({
        "kind": args.kind.to_possible_value().map(|v| v.get_name().to_string()),
        "seed": args.seed,
        "files": files,
        "expected_de": expected,
    });
    Ok((EXIT_OK, to_json(&summary)))
}

#[derive(Serialize, Default, Clone)]
pub struct ClassSummary {
    pub instances: usize,
    pub positive: usize,
    pub mismatches: usize,
    pub witness_failures: usize,
}

#[derive(Serialize)]
pub struct CompareSummary {
    pub seed: u64,
    pub instances: usize,
    pub mismatches: usize,
    pub witness_failures: usize,
    pub classes: BTreeMap<String, ClassSummary>,
    pub dumped: Vec<String>,
    #[serde(rename = "elapsed_ms", skip_serializing_if = "Option::is_none")]
    pub elapsed: Option<f64>,
}

struct Outcome {
    class: ObjClass,
    index: usize,
    solver: bool,
    oracle: bool,
    witness_ok: bool,
    instance: (Arena, Profile),
}

fn instance_seed(base: u64, class: ObjClass, k: usize) -> u64 {
    let c = ObjClass::ALL.iter().position(|&x| x == class).unwrap() as u64;
    base.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (c << 48) ^ k as u64
}

pub fn cmd_compare(args: &CompareArgs) -> CmdResult {
    let start = Instant::now();
    let classes: Vec<ObjClass> = args
        .classes
        .iter()
        .filter(|c| !c.is_empty())
        .map(|c| ObjClass::parse(c))
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::from_err(EXIT_ERROR, &e))?;
    let mut jobs = Vec::new();
    for &class in &classes {
        let (count, size) = match class {
            ObjClass::Parity => (args.parity_count.unwrap_or(args.count), args.parity_max_states),
            _ => (args.count, args.max_states),
        };
        if count > 0 && size > max_states(class) {
            return Err(Failure::new(
                EXIT_ERROR,
                "TooLarge",
                format!("{class} instances of {size} states exceed the oracle bound of {}", max_states(class)),
            ));
        }
        if count > 0 && size == 0 {
            return Err(bad_params("instances need at least one state"));
        }
        jobs.extend((0..count).map(|k| (class, k, size)));
    }
    let outcomes: Vec<Result<Outcome, Failure>> = jobs
        .par_iter()
        .map(|&(class, k, size)| {
            let (a, p) = random_instance(class, size, args.players, args.actions, instance_seed(args.seed, class, k));
            let regions = retaliation_regions(&a, &p).map_err(|e| Failure::from_err(EXIT_ERROR, &e))?;
            let d = decide_de_with_regions(&a, &p, regions);
            let oracle = brute_de(&a, &p).map_err(|e| Failure::from_err(EXIT_ERROR, &e))?;
            let witness_ok = !(args.verify && d.exists && synthesis_supported(&a, &p))
                || synthesize_profile(&a, &p, &d)
                    .ok()
                    .and_then(|w| check_witness(&a, &p, &w).ok())
                    .is_some_and(|r| r.passed());
            Ok(Outcome { class, index: k, solver: d.exists, oracle, witness_ok, instance: (a, p) })
        })
        .collect();
    let mut summary = CompareSummary {
        seed: args.seed,
        instances: 0,
        mismatches: 0,
        witness_failures: 0,
        classes: classes.iter().map(|c| (c.to_string(), ClassSummary::default())).collect(),
        dumped: Vec::new(),
        elapsed: None,
    };
    for o in outcomes {
        let o = o?;
        let cs = summary.classes.get_mut(&o.class.to_string()).unwrap();
        cs.instances += 1;
        cs.positive += o.solver as usize;
        summary.instances += 1;
        let mismatch = o.solver != o.oracle;
        if mismatch {
            cs.mismatches += 1;
            summary.mismatches += 1;
        }
        if !o.witness_ok {
            cs.witness_failures += 1;
            summary.witness_failures += 1;
        }
        if mismatch || !o.witness_ok {
            let dir = args.dump.join(format!("{}-{}", o.class, o.index));
            std::fs::create_dir_all(&dir).map_err(|e| Failure::io(&dir, e))?;
            write(&dir.join("arena.json"), &o.instance.0.to_json())?;
            write(&dir.join("objectives.json"), &o.instance.1.to_json())?;
            let res = serde_json::json!({ "solver": o.solver, "oracle": o.oracle, "witness_ok": o.witness_ok });
            write(&dir.join("result.json"), &to_json(&res))?;
            summary.dumped.push(dir.display().to_string());
        }
    }
    if !args.no_timing {
        summary.elapsed = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    let text = emit(&summary, args.json.as_deref())?;
    let clean = summary.mismatches == 0 && summary.witness_failures == 0;
    Ok((if clean { EXIT_OK } else { EXIT_NO }, text))
}
