use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dembudget::oracle::{self, VerificationReport};
use dembudget::{
    load_election, to_canonical_json, Election, LinearOrder, Profile, Proposal, PruningOptions,
    TieBreakPolicy,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smith-consistent budgeting from the command line.
#[derive(Parser, Debug)]
#[command(name = "dembudget", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Election file (JSON); standard input when omitted or `-`.
    #[arg(long, short, global = true)]
    input: Option<PathBuf>,
    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Override the file's tie-break policy: cost, index or id.
    #[arg(long, global = true)]
    tiebreak: Option<TieBreakPolicy>,
    /// Pick the maximal subset closest to the previous budget exactly.
    #[arg(long, global = true)]
    exact_knapsack: bool,
    /// Seed for `verify --random`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the ranked partition of the items.
    Rank {
        /// Print the majority graph as `u w` arc lines instead.
        #[arg(long)]
        graph: bool,
        /// Use the weak majority graph with `--graph`.
        #[arg(long, requires = "graph")]
        weak: bool,
    },
    /// Run SBA (or ESBA for quantitative proposals).
    Budget,
    /// Check the computed budget against the brute-force oracle.
    Verify {
        /// Ignore the input and verify this many random small elections.
        #[arg(long)]
        random: Option<usize>,
    },
    /// Rank each section and consolidate.
    Hierarchy,
    /// Prune each section ranking by its own limit.
    Whatif {
        /// Section limits, e.g. `A=2,B=0`. Unlisted sections get 0.
        #[arg(long, value_parser = parse_limits)]
        limits: BTreeMap<String, u64>,
    },
}

fn parse_limits(s: &str) -> Result<BTreeMap<String, u64>, String> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (id, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected SECTION=LIMIT, got {part:?}"))?;
        let value = value
            .trim()
            .parse()
            .map_err(|e| format!("limit for {:?}: {e}", id.trim()))?;
        if out.insert(id.trim().to_string(), value).is_some() {
            return Err(format!("section {:?} given twice", id.trim()));
        }
    }
    Ok(out)
}

enum Failure {
    Invalid(String),
    Refused(String),
    Unverified(String),
}

impl From<dembudget::Error> for Failure {
    fn from(e: dembudget::Error) -> Self {
        if e.is_refusal() {
            Failure::Refused(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Refused(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Unverified(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Command::Verify { random: Some(n) } = cli.command {
        let summary = random_verification(n, cli.common.seed)?;
        let failed = summary.failed.len();
        emit(&cli.common, &to_canonical_json(&summary))?;
        if failed > 0 {
            return Err(Failure::Unverified(format!("{failed} of {n} random elections")));
        }
        return Ok(());
    }

    let election = read_election(&cli.common)?;
    let text = match &cli.command {
        Command::Rank { graph: true, weak } => {
            let g = election.majority_graph()?;
            let g = if *weak { g.weak() } else { g };
            g.to_arc_list(&election.proposal)
        }
        Command::Rank { graph: false, .. } => {
            to_canonical_json(&election.rank()?.labels(&election.proposal))
        }
        Command::Budget => to_canonical_json(&election.budget_report(&election.run()?)),
        Command::Verify { .. } => {
            let report = election.verify()?;
            let text = to_canonical_json(&report);
            if !report.passed() {
                emit(&cli.common, &text)?;
                return Err(Failure::Unverified(describe_failure(&report)));
            }
            text
        }
        Command::Hierarchy => {
            let out = election.consolidate()?;
            to_canonical_json(&election.hierarchy_report(&out)?)
        }
        Command::Whatif { limits } => to_canonical_json(&election.what_if_report(limits)?),
    };
    emit(&cli.common, &text)
}

fn read_election(common: &Common) -> Result<Election, Failure> {
    let bytes = match &common.input {
        Some(path) if path.as_os_str() != "-" => fs::read(path)
            .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?,
        _ => {
            let mut buf = Vec::new();
            io::stdin()
                .read_to_end(&mut buf)
                .map_err(|e| Failure::Invalid(format!("cannot read standard input: {e}")))?;
            buf
        }
    };
    let mut election = load_election(&bytes)?;
    if let Some(tb) = common.tiebreak {
        election.options.tie_break = tb;
    }
    election.options.exact_knapsack |= common.exact_knapsack;
    Ok(election)
}

fn emit(common: &Common, text: &str) -> Result<(), Failure> {
    match &common.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Invalid(format!("cannot write output: {e}"))),
    }
}

fn describe_failure(r: &VerificationReport) -> String {
    let mut problems = Vec::new();
    if !r.feasible {
        problems.push("budget exceeds the limit");
    }
    if !r.exhaustive {
        problems.push("budget is not exhaustive");
    }
    if !r.smith_member {
        problems.push("budget is outside the Smith set");
    }
    if r.condorcet_match == Some(false) {
        problems.push("budget is not the Condorcet winner");
    }
    problems.join("; ")
}

#[derive(serde::Serialize)]
struct RandomSummary {
    seed: u64,
    instances: usize,
    passed: usize,
    with_condorcet_winner: usize,
    /// Indices of the failing instances.
    failed: Vec<usize>,
}

/// Small unit elections: ≤ 5 items costing 1–4, ℓ ≤ 8, 1–7 linear voters.
fn random_verification(n: usize, seed: u64) -> Result<RandomSummary, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = RandomSummary {
        seed,
        instances: n,
        passed: 0,
        with_condorcet_winner: 0,
        failed: Vec::new(),
    };
    for i in 0..n {
        let items = rng.gen_range(1..=5);
        let proposal = Proposal::unit((0..items).map(|j| (format!("x{j}"), rng.gen_range(1..=4))))?;
        let ids: Vec<String> = (0..items).map(|j| format!("x{j}")).collect();
        let voters = rng.gen_range(1..=7);
        let ballots = (0..voters)
            .map(|_| {
                let mut order = ids.clone();
                order.shuffle(&mut rng);
                LinearOrder::new(&proposal, &order).map(Into::into)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let profile = Profile::new(ballots)?;
        let limit = rng.gen_range(0..=8);
        let prev = proposal.budget_of(ids.iter().filter(|_| rng.gen_bool(0.5)))?;
        let report = oracle::verify(&proposal, &profile, limit, &prev, PruningOptions::default())?;
        if report.condorcet_winner.is_some() {
            summary.with_condorcet_winner += 1;
        }
        if report.passed() {
            summary.passed += 1;
        } else {
            summary.failed.push(i);
        }
    }
    Ok(summary)
}
