//! `dcx`: batch verifier for chain complexes, 𝒟-complexes and the nil
//! calculus. Exit 0 when the checked property holds, 1 when it fails (the
//! report carries a witness), 2 on unreadable input or bad usage.

mod report;
mod verbs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dcx_core::d0::Bound;
use dcx_core::linalg::Ring;

use report::Report;

#[derive(Parser, Debug)]
#[command(name = "dcx", version, about = "Exact verifier for chain complexes and diagram complexes")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug, Clone)]
pub struct Opts {
    /// Print a machine-readable report.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Search bound for nilpotency, or the largest p for tp-check.
    #[arg(long = "max-n", global = true)]
    pub max_n: Option<usize>,
    /// Level index for class tests, or the instance count for fuzz.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Range of test indices for an-local.
    #[arg(long, global = true, value_parser = parse_bound, default_value = "inclusive")]
    pub bound: Bound,
    /// Change of coefficients applied to chain complex inputs.
    #[arg(long, global = true, value_parser = parse_ring)]
    pub ring: Option<Ring>,
}

fn parse_bound(s: &str) -> Result<Bound, String> {
    s.parse().map_err(|e: dcx_core::Error| e.to_string())
}

fn parse_ring(s: &str) -> Result<Ring, String> {
    s.parse().map_err(|e: dcx_core::Error| e.to_string())
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Load a document and check its structural invariants.
    Verify { file: PathBuf },
    /// Homology of a chain complex.
    Homology { file: PathBuf },
    /// Null-homotopy of a graded map, or a contraction of a complex.
    Homotopy { file: PathBuf },
    /// Mapping cone of a chain map; holds when the map is a homology equivalence.
    Cone { file: PathBuf },
    /// Smallest n with every composite of n + 1 edges null-homotopic.
    Nilpotency { file: PathBuf },
    /// Membership of a D0-complex in the classes B_n and A_n.
    Classify { file: PathBuf },
    /// B_n-locality with contraction witnesses.
    BnLocal { file: PathBuf },
    /// A_n-locality, kernel route and square route.
    AnLocal { file: PathBuf },
    /// Factor a map of D0-complexes through a levelwise contractible object.
    Factor { file: PathBuf },
    /// dT_p = Σ T_i (T_j ⊗ 1) for the splitting data of a nil document.
    TpCheck { file: PathBuf },
    /// Splitting identities, δδ = 0 and the f̂ recursion.
    DeltaCheck { file: PathBuf },
    /// Invert a δ-cycle through the homotopy series.
    Invert { file: PathBuf },
    /// Order of the total homology over Z.
    Order { file: PathBuf },
    /// Least N with N·1 null-homotopic.
    Annihilator { file: PathBuf },
    /// Acyclicity after tensoring with Q.
    QAcyclic { file: PathBuf },
    /// Randomized invariant suite.
    Fuzz,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = cli.opts;
    let result = match &cli.verb {
        Verb::Verify { file } => verbs::verify(file, &opts),
        Verb::Homology { file } => verbs::homology(file, &opts),
        Verb::Homotopy { file } => verbs::homotopy(file, &opts),
        Verb::Cone { file } => verbs::cone(file, &opts),
        Verb::Nilpotency { file } => verbs::nilpotency(file, &opts),
        Verb::Classify { file } => verbs::classify(file, &opts),
        Verb::BnLocal { file } => verbs::bn_local(file, &opts),
        Verb::AnLocal { file } => verbs::an_local(file, &opts),
        Verb::Factor { file } => verbs::factor(file, &opts),
        Verb::TpCheck { file } => verbs::tp_check(file, &opts),
        Verb::DeltaCheck { file } => verbs::delta_check(file, &opts),
        Verb::Invert { file } => verbs::invert(file, &opts),
        Verb::Order { file } => verbs::order(file, &opts),
        Verb::Annihilator { file } => verbs::annihilator(file, &opts),
        Verb::QAcyclic { file } => verbs::q_acyclic(file, &opts),
        Verb::Fuzz => verbs::fuzz(&opts),
    };
    match result {
        Ok(report) => report.emit(opts.json),
        Err(e) => {
            if opts.json {
                println!("{}", serde_json::json!({ "error": format!("{e:#}") }));
            }
            eprintln!("dcx: {e:#}");
            ExitCode::from(2)
        }
    }
}

impl Report {
    fn emit(self, json: bool) -> ExitCode {
        if json {
            println!("{}", serde_json::to_string_pretty(&self.to_json()).expect("report is plain data"));
        } else {
            for line in &self.lines {
                println!("{line}");
            }
        }
        ExitCode::from(if self.holds { 0 } else { 1 })
    }
}
