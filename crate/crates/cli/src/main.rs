use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use matfactor::factor2::sum_of_products_decompose;
use matfactor::oracle::{verify_theorem, Theorem, VerifyConfig, DEFAULT_CEILING};
use matfactor::{
    hyperplane_pair_factor, n2_classify, n2_pair_factor, semigroup_factor, two_hyperplanes_factor, AnySubspace, Error,
    Hyperplane, Matrix, N2Outcome, SearchBudget,
};

mod report;

use report::{Outcome, RunReport};

#[derive(Parser, Debug)]
#[command(
    name = "matfactor",
    version,
    about = "Exact matrix factorization through large subspaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Include wall-clock timing in the report (makes output non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Factor a matrix through a subspace.
    Factor(FactorArgs),
    /// Run a theorem suite against the brute-force oracle.
    Verify(VerifyArgs),
    /// Classify a hyperplane of M_2.
    Classify2(Classify2Args),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    /// Two factors in a hyperplane (or one in each of two hyperplanes), n >= 3.
    Pair,
    /// Two factors in a hyperplane of M_2, or the obstruction.
    Pair2,
    /// A chain of factors in an affine subspace.
    Semigroup,
    /// A sum of products of pairs from a linear subspace.
    Sumprod,
}

#[derive(Args, Debug)]
struct BudgetArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random candidates per search layer.
    #[arg(long, default_value_t = 64)]
    trials: usize,
    /// Largest exhaustive enumeration (0 disables exhaustive search).
    #[arg(long, default_value_t = 2_000_000)]
    exhaustive_ceiling: u64,
}

impl BudgetArgs {
    fn budget(&self) -> SearchBudget {
        SearchBudget {
            rng_seed: self.seed,
            max_random_trials: self.trials,
            allow_exhaustive: self.exhaustive_ceiling > 0,
            exhaustive_ceiling: self.exhaustive_ceiling,
        }
    }
}

#[derive(Args, Debug)]
struct FactorArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Target matrix (JSON).
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    hyperplane: Option<PathBuf>,
    /// Hyperplane for the right factor in `pair` mode.
    #[arg(long)]
    hyperplane2: Option<PathBuf>,
    /// Affine subspace for `semigroup` mode (any subspace kind).
    #[arg(long)]
    affine: Option<PathBuf>,
    /// Linear subspace for `sumprod` mode.
    #[arg(long)]
    subspace: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    theorem: Theorem,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: u64,
    /// Random instances when not exhaustive.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Check every hyperplane instead of a sample.
    #[arg(long)]
    exhaustive: bool,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args, Debug)]
struct Classify2Args {
    #[arg(long)]
    hyperplane: PathBuf,
}

/// Reads inputs in order and feeds each file's bytes into the digest.
struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    fn new() -> Self {
        Inputs { hasher: Sha256::new() }
    }

    fn read<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> Result<T, Error> {
        let bytes = std::fs::read(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(&bytes);
        serde_json::from_slice(&bytes).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    fn digest(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Error> {
    path.as_deref()
        .ok_or_else(|| Error::Parse(format!("--{flag} is required for this mode")))
}

fn hyperplane_of(any: AnySubspace) -> Result<Hyperplane, Error> {
    match any {
        AnySubspace::Hyperplane(h) => Ok(h),
        _ => Err(Error::Parse("expected a subspace of kind `hyperplane`".into())),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("artifacts serialize")
}

fn cmd_factor(args: &FactorArgs, inputs: &mut Inputs) -> Result<(Outcome, Value), Error> {
    let budget = args.budget.budget();
    let m: Matrix = inputs.read(&args.matrix)?;
    match args.mode {
        Mode::Pair => {
            let h1 = hyperplane_of(inputs.read(required(&args.hyperplane, "hyperplane")?)?)?;
            let pf = match &args.hyperplane2 {
                Some(p) => {
                    let h2 = hyperplane_of(inputs.read(p)?)?;
                    two_hyperplanes_factor(&h1, &h2, &m, &budget)?
                }
                None => hyperplane_pair_factor(&h1, &m, &budget)?,
            };
            let verified = pf.is_verified() && &pf.left * &pf.right == m;
            Ok((
                Outcome::from(verified),
                json!({ "B": pf.left, "C": pf.right, "verified": verified }),
            ))
        }
        Mode::Pair2 => {
            let h = hyperplane_of(inputs.read(required(&args.hyperplane, "hyperplane")?)?)?;
            match n2_pair_factor(&h, &m, &budget)? {
                N2Outcome::Factored(pf) => {
                    let verified = pf.is_verified() && &pf.left * &pf.right == m;
                    Ok((
                        Outcome::from(verified),
                        json!({ "outcome": "factored", "B": pf.left, "C": pf.right, "verified": verified }),
                    ))
                }
                N2Outcome::Impossible(ob) => {
                    Ok((Outcome::Success, json!({ "outcome": "impossible", "obstruction": ob })))
                }
            }
        }
        Mode::Semigroup => {
            let any: AnySubspace = inputs.read(required(&args.affine, "affine")?)?;
            let chain = semigroup_factor(&any.to_affine(), &m, &budget)?;
            let verified = chain.is_verified();
            Ok((
                Outcome::from(verified),
                json!({
                    "factors": chain.factors,
                    "length": chain.len(),
                    "conjugator": chain.conjugator,
                    "verified": verified,
                }),
            ))
        }
        Mode::Sumprod => {
            let any: AnySubspace = inputs.read(required(&args.subspace, "subspace")?)?;
            let space = match any {
                AnySubspace::Linear(v) => v,
                AnySubspace::Hyperplane(h) => h.subspace(),
                AnySubspace::Affine(_) => return Err(Error::Parse("sumprod needs a linear subspace".into())),
            };
            let s = sum_of_products_decompose(&space, &m)?;
            let verified = s.is_valid_for(&space) && s.sum() == m;
            let terms: Vec<Value> = s.terms.iter().map(|(b, c)| json!({ "B": b, "C": c })).collect();
            Ok((
                Outcome::from(verified),
                json!({ "terms": terms, "count": terms.len(), "verified": verified }),
            ))
        }
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<(Outcome, Value), Error> {
    let cfg = VerifyConfig {
        theorem: args.theorem,
        n: args.n,
        p: args.p,
        samples: args.samples,
        exhaustive: args.exhaustive,
        targets_per_instance: 2,
        budget: args.budget.budget(),
        ceiling: DEFAULT_CEILING,
    };
    let report = verify_theorem(&cfg)?;
    Ok((Outcome::from(report.passed), to_value(&report)))
}

fn cmd_classify2(args: &Classify2Args, inputs: &mut Inputs) -> Result<(Outcome, Value), Error> {
    let h = hyperplane_of(inputs.read(&args.hyperplane)?)?;
    let class = n2_classify(&h)?;
    Ok((Outcome::Success, to_value(&class)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let command: Vec<String> = std::env::args().skip(1).collect();
    let mut inputs = Inputs::new();
    let (seed, result) = match &cli.command {
        Command::Factor(a) => (a.budget.seed, cmd_factor(a, &mut inputs)),
        Command::Verify(a) => (a.budget.seed, cmd_verify(a)),
        Command::Classify2(a) => (0, cmd_classify2(a, &mut inputs)),
    };
    let report = RunReport::new(
        command,
        inputs.digest(),
        seed,
        result,
        cli.timing.then(|| started.elapsed()),
    );
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    // A closed pipe is not worth a panic; the exit code still carries the outcome.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    ExitCode::from(report.exit_code())
}
