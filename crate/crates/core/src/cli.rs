//! Command implementations behind the `stabsplit` binary.
//!
//! Each command returns an [`Outcome`] (exit code plus captured output) so
//! it can be driven in-process by tests.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bipartite::{decompose, entanglement_rank};
use crate::codec::{format_fourway, parse_bipartition, parse_fourway, parse_stab_file};
use crate::error::Error;
use crate::measurement::{measure, MeasureMode};
use crate::oracle::{cross_check_ssa, MAX_STATE_QUBITS};
use crate::pauli::{Pauli1, PauliOperator, QubitSet};
use crate::rng::{derive_seed, rng_for};
use crate::stab_group::{random_stabilizer, StabilizerGroup};
use crate::superadditivity::{ef_code_projector, verify_ssa, CodeProjector, FourWayPartition};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONSTRUCTION: i32 = 3;

pub const THREADS_ENV: &str = "STABSPLIT_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "stabsplit",
    version,
    about = "Entanglement of stabilizer states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Entanglement rank of a pure stabilizer state across `A=..;B=..`.
    Entanglement {
        state_file: PathBuf,
        partition: String,
        #[arg(long)]
        json: bool,
    },
    /// Check super-additivity for a four-way split `A1=..;A2=..;B1=..;B2=..`.
    SsaVerify {
        state_file: PathBuf,
        partition: String,
        #[arg(long)]
        json: bool,
        /// Include the selected measurement operators.
        #[arg(long)]
        explain: bool,
    },
    /// Entanglement of formation of the code projector of a group.
    EfProjector {
        group_file: PathBuf,
        partition: String,
        #[arg(long)]
        json: bool,
    },
    /// Random super-additivity trials.
    Fuzz(FuzzArgs),
}

#[derive(Args, Debug, Clone)]
pub struct FuzzArgs {
    #[arg(long, default_value_t = 8)]
    pub qubits: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run dense cross-checks on trials with at most this many qubits.
    #[arg(long, default_value_t = 0)]
    pub oracle_max: usize,
    /// Directory for minimized reproducers.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, stderr: String) -> Self {
        Self {
            code,
            stdout: String::new(),
            stderr,
        }
    }
}

/// Input problems exit 2, everything else that fails is a construction
/// failure (3).
fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::CompletionNotAchieved { .. } | Error::InvariantViolated(_) => EXIT_CONSTRUCTION,
        _ => EXIT_INPUT,
    }
}

fn error_outcome(e: Error) -> Outcome {
    Outcome::fail(exit_code_for(&e), format!("error: {e}\n"))
}

fn read_group(path: &Path) -> Result<StabilizerGroup, Outcome> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Outcome::fail(
            EXIT_INPUT,
            format!("error: cannot read {}: {e}\n", path.display()),
        )
    })?;
    parse_stab_file(&text)
        .map_err(|e| Outcome::fail(EXIT_INPUT, format!("error: {}: {e}\n", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("serializable");
    s.push('\n');
    s
}

/// Integral values print without a fractional part.
fn ser_ebits<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        s.serialize_i64(*v as i64)
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Serialize)]
struct EntanglementJson {
    e_ab: usize,
    #[serde(serialize_with = "ser_ebits")]
    entropy_ebits: f64,
    rank_s_a: usize,
    rank_s_b: usize,
}

pub fn cmd_entanglement(state_file: &Path, partition: &str, json: bool) -> Outcome {
    let group = match read_group(state_file) {
        Ok(g) => g,
        Err(o) => return o,
    };
    let run = || -> crate::Result<EntanglementJson> {
        let part = parse_bipartition(partition, group.n())?;
        let rank = entanglement_rank(&group, &part)?;
        let dec = decompose(&group, &part)?;
        Ok(EntanglementJson {
            e_ab: rank.e_ab,
            entropy_ebits: rank.entropy_ebits,
            rank_s_a: dec.s_a.rank(),
            rank_s_b: dec.s_b.rank(),
        })
    };
    match run() {
        Ok(r) if json => Outcome::ok(to_json(&r)),
        Ok(r) => Outcome::ok(format!(
            "e_ab           {}\nentropy_ebits  {}\nrank_s_a       {}\nrank_s_b       {}\n",
            r.e_ab, r.entropy_ebits, r.rank_s_a, r.rank_s_b
        )),
        Err(e) => error_outcome(e),
    }
}

pub fn cmd_ssa_verify(state_file: &Path, partition: &str, json: bool, explain: bool) -> Outcome {
    let group = match read_group(state_file) {
        Ok(g) => g,
        Err(o) => return o,
    };
    if !group.is_maximal() {
        return Outcome::fail(
            EXIT_INPUT,
            format!(
                "error: the group has rank {} on {} qubits and stabilizes a mixed state; \
                 use `stabsplit ef-projector` for code projectors\n",
                group.rank(),
                group.n()
            ),
        );
    }
    let fw = match parse_fourway(partition, group.n()) {
        Ok(f) => f,
        Err(e) => return error_outcome(e),
    };
    let mut report = match verify_ssa(&group, &fw) {
        Ok(r) => r,
        Err(e) => return error_outcome(e),
    };
    if !explain {
        report.explain = None;
    }
    let code = if report.holds && report.all_bounds_hold() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    };
    let stdout = if json {
        to_json(&report)
    } else {
        let mut s = format!(
            "e_AB(S)        {}\ne_AB(S^M_1)    {}\ne_AB(S^M_2)    {}\nholds          {}\n\nbounds\n",
            report.e_global, report.e1, report.e2, report.holds
        );
        for b in &report.bounds {
            let rel = match b.relation {
                crate::superadditivity::Relation::Le => "<=",
                crate::superadditivity::Relation::Eq => "==",
                crate::superadditivity::Relation::Ge => ">=",
            };
            s.push_str(&format!(
                "  {:<36} {:>6} {rel} {:<6} {}\n",
                b.name,
                b.lhs,
                b.rhs,
                if b.holds { "ok" } else { "FAILED" }
            ));
        }
        if let Some(ex) = &report.explain {
            for (label, ops) in [
                ("partition 2", &ex.plan_part2),
                ("partition 1", &ex.plan_part1),
            ] {
                s.push_str(&format!("\nmeasured on {label}\n"));
                for op in ops {
                    s.push_str(&format!("  {op}\n"));
                }
            }
        }
        s
    };
    Outcome {
        code,
        stdout,
        stderr: String::new(),
    }
}

#[derive(Serialize)]
struct EfJson {
    p: usize,
    witness_generators: Vec<String>,
    e_ab_witness: usize,
}

pub fn cmd_ef_projector(group_file: &Path, partition: &str, json: bool) -> Outcome {
    let group = match read_group(group_file) {
        Ok(g) => g,
        Err(o) => return o,
    };
    let run = || -> crate::Result<EfJson> {
        let part = parse_bipartition(partition, group.n())?;
        let r = ef_code_projector(&CodeProjector { h: group.clone() }, &part)?;
        Ok(EfJson {
            p: r.p,
            witness_generators: r
                .witness
                .generators()
                .iter()
                .map(|g| g.to_string())
                .collect(),
            e_ab_witness: entanglement_rank(&r.witness, &part)?.e_ab,
        })
    };
    match run() {
        Ok(r) if json => Outcome::ok(to_json(&r)),
        Ok(r) => {
            let mut s = format!(
                "p              {}\ne_ab_witness   {}\nwitness\n",
                r.p, r.e_ab_witness
            );
            for g in &r.witness_generators {
                s.push_str(&format!("  {g}\n"));
            }
            Outcome::ok(s)
        }
        Err(e) => error_outcome(e),
    }
}

/// Random four-way split with every block non-empty (`n >= 4`).
pub fn random_fourway(n: usize, rng: &mut impl Rng) -> FourWayPartition {
    assert!(n >= 4, "four-way split needs at least 4 qubits");
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut blocks: [Vec<usize>; 4] = Default::default();
    for (i, &q) in order.iter().enumerate() {
        let b = if i < 4 { i } else { rng.random_range(0..4) };
        blocks[b].push(q);
    }
    let [a1, a2, b1, b2] = blocks;
    FourWayPartition::new(n, a1, a2, b1, b2).expect("blocks cover every qubit once")
}

/// State and split of fuzz trial `index`.
pub fn fuzz_instance(
    n: usize,
    seed: u64,
    index: u64,
) -> crate::Result<(StabilizerGroup, FourWayPartition)> {
    let s = derive_seed(seed, index);
    let group = random_stabilizer(n, s)?;
    let fw = random_fourway(n, &mut rng_for(s, 1));
    Ok((group, fw))
}

/// Runs every check of one fuzz trial; `Err` describes the first failure.
pub fn check_instance(
    group: &StabilizerGroup,
    fw: &FourWayPartition,
    oracle: bool,
) -> Result<(), String> {
    let report = verify_ssa(group, fw).map_err(|e| format!("verification failed: {e}"))?;
    if !report.holds {
        return Err(format!(
            "super-additivity violated: {} + {} > {}",
            report.e1, report.e2, report.e_global
        ));
    }
    if let Some(b) = report.bounds.iter().find(|b| !b.holds) {
        return Err(format!("bound {} failed: {} vs {}", b.name, b.lhs, b.rhs));
    }
    if oracle {
        cross_check_ssa(group, fw, &report)?;
    }
    Ok(())
}

/// Pure state on the other qubits after fixing qubit `q` to a `Z`
/// eigenstate.
pub fn drop_qubit(group: &StabilizerGroup, q: usize) -> crate::Result<StabilizerGroup> {
    let n = group.n();
    let z = PauliOperator::single(n, q, Pauli1::Z);
    let post = measure(group, &z, MeasureMode::BranchAgnostic)?.post_group;
    let rest = QubitSet::new(n, (0..n).filter(|&i| i != q))?;
    let kernel = crate::bipartite::trivial_subgroup(&post, &QubitSet::new(n, [q])?)?;
    let ops = kernel
        .generators()
        .iter()
        .map(|g| g.restrict_keep_sign(&rest))
        .collect::<crate::Result<Vec<_>>>()?;
    StabilizerGroup::new(n - 1, ops)
}

fn drop_from_partition(fw: &FourWayPartition, q: usize) -> crate::Result<FourWayPartition> {
    let shift = |s: &QubitSet| -> Vec<usize> {
        s.iter()
            .filter(|&&i| i != q)
            .map(|&i| if i > q { i - 1 } else { i })
            .collect()
    };
    FourWayPartition::new(
        fw.n() - 1,
        shift(fw.a1()),
        shift(fw.a2()),
        shift(fw.b1()),
        shift(fw.b2()),
    )
}

/// Greedily removes qubits while `still_fails` keeps returning `true`.
pub fn minimize<F>(
    group: &StabilizerGroup,
    fw: &FourWayPartition,
    still_fails: F,
) -> (StabilizerGroup, FourWayPartition)
where
    F: Fn(&StabilizerGroup, &FourWayPartition) -> bool,
{
    let (mut g, mut f) = (group.clone(), fw.clone());
    'outer: loop {
        for q in 0..g.n() {
            if g.n() <= 1 {
                break 'outer;
            }
            let (Ok(g2), Ok(f2)) = (drop_qubit(&g, q), drop_from_partition(&f, q)) else {
                continue;
            };
            if still_fails(&g2, &f2) {
                g = g2;
                f = f2;
                continue 'outer;
            }
        }
        break;
    }
    (g, f)
}

/// `.stab` text with the partition recorded in a comment.
pub fn reproducer_text(group: &StabilizerGroup, fw: &FourWayPartition, why: &str) -> String {
    format!(
        "# {why}\n# partition {}\n{}",
        format_fourway(fw),
        crate::codec::format_stab_file(group)
    )
}

/// File name derived from the SHA-256 of the contents.
pub fn reproducer_name(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    format!("{hex}.stab")
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct FuzzSummary {
    pub qubits: usize,
    pub seed: u64,
    pub trials: usize,
    pub violations: usize,
    pub oracle_checked: usize,
    pub reproducers: Vec<String>,
}

struct TrialResult {
    oracle: bool,
    failure: Option<(String, String)>,
}

fn run_trial(args: &FuzzArgs, index: u64) -> TrialResult {
    let oracle = args.qubits <= args.oracle_max.min(MAX_STATE_QUBITS);
    let (group, fw) = match fuzz_instance(args.qubits, args.seed, index) {
        Ok(x) => x,
        Err(e) => {
            return TrialResult {
                oracle: false,
                failure: Some((
                    format!("trial {index}: generation failed: {e}"),
                    String::new(),
                )),
            }
        }
    };
    let failure = check_instance(&group, &fw, oracle).err().map(|why| {
        let (g, f) = minimize(&group, &fw, |g, f| {
            f.n() >= 1 && check_instance(g, f, oracle && g.n() <= MAX_STATE_QUBITS).is_err()
        });
        let text = reproducer_text(&g, &f, &format!("trial {index}: {why}"));
        (format!("trial {index}: {why}"), text)
    });
    TrialResult { oracle, failure }
}

/// Thread count from `STABSPLIT_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
}

/// Runs the trials on `threads` workers (default: rayon's choice). The
/// summary does not depend on the thread count.
pub fn run_fuzz(
    args: &FuzzArgs,
    threads: Option<usize>,
) -> Result<(FuzzSummary, Vec<String>), Error> {
    if args.qubits < 4 {
        return Err(Error::InvalidPartition(format!(
            "fuzzing needs at least 4 qubits, got {}",
            args.qubits
        )));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvariantViolated(format!("thread pool: {e}")))?;
    let results: Vec<TrialResult> = pool.install(|| {
        (0..args.trials as u64)
            .into_par_iter()
            .map(|i| run_trial(args, i))
            .collect()
    });
    let mut messages = Vec::new();
    let mut names = Vec::new();
    for r in &results {
        if let Some((why, text)) = &r.failure {
            messages.push(why.clone());
            let name = reproducer_name(text);
            if let Some(dir) = &args.out {
                std::fs::create_dir_all(dir)
                    .and_then(|_| std::fs::write(dir.join(&name), text))
                    .map_err(|e| Error::InvalidPlan(format!("cannot write reproducer: {e}")))?;
            }
            if !names.contains(&name) {
                names.push(name);
            }
        }
    }
    let summary = FuzzSummary {
        qubits: args.qubits,
        seed: args.seed,
        trials: args.trials,
        violations: messages.len(),
        oracle_checked: results.iter().filter(|r| r.oracle).count(),
        reproducers: names,
    };
    Ok((summary, messages))
}

pub fn cmd_fuzz(args: &FuzzArgs) -> Outcome {
    match run_fuzz(args, threads_from_env()) {
        Ok((summary, messages)) => Outcome {
            code: if summary.violations == 0 {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            },
            stdout: to_json(&summary),
            stderr: messages.iter().map(|m| format!("{m}\n")).collect(),
        },
        Err(e) => error_outcome(e),
    }
}

pub fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Entanglement {
            state_file,
            partition,
            json,
        } => cmd_entanglement(state_file, partition, *json),
        Command::SsaVerify {
            state_file,
            partition,
            json,
            explain,
        } => cmd_ssa_verify(state_file, partition, *json, *explain),
        Command::EfProjector {
            group_file,
            partition,
            json,
        } => cmd_ef_projector(group_file, partition, *json),
        Command::Fuzz(args) => cmd_fuzz(args),
    }
}
