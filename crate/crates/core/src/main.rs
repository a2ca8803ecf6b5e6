use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use fairtransport::audit::{AuditReport, DEFAULT_PERMUTATIONS};
use fairtransport::certify::verify_certificate;
use fairtransport::pipeline::{self, passes_threshold, PipelineError, RunConfig, DEFAULT_P_THRESHOLD};
use fairtransport::transport::Method;

const EXIT_INVALID: u8 = 2;
const EXIT_MISMATCH: u8 = 3;
const EXIT_THRESHOLD: u8 = 4;

#[derive(Parser)]
#[command(name = "fairtransport", version, about = "Ontology-guided fairness certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the mask matrix and its atoms.
    Compile(RunArgs),
    /// Construct the fair representation.
    Project(RunArgs),
    /// Test the representation (or, with --raw, the original features) for dependence on the atoms.
    Audit {
        #[command(flatten)]
        run: RunArgs,
        /// Audit the unprojected features instead.
        #[arg(long)]
        raw: bool,
    },
    /// Run the full chain and write cert.json.
    Certify(RunArgs),
    /// Re-derive a certificate from its inputs.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    ontology: PathBuf,
    #[arg(long)]
    binding: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = Method::Quantile1d)]
    method: Method,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    permutations: u32,
    #[arg(long, env = "FAIRTRANSPORT_SEED")]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_P_THRESHOLD)]
    p_threshold: f64,
    #[arg(long)]
    allow_trivial: bool,
    /// Print machine-readable JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    cert: PathBuf,
    #[arg(long)]
    ontology: PathBuf,
    #[arg(long)]
    binding: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    json: bool,
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        let seed = self.seed.unwrap_or_else(|| {
            let s = rand::random();
            eprintln!("no seed given; using generated seed {s}");
            s
        });
        RunConfig {
            ontology: self.ontology.clone(),
            binding: self.binding.clone(),
            data: self.data.clone(),
            out: self.out.clone(),
            method: self.method,
            epsilon: self.epsilon,
            permutations: self.permutations,
            seed,
            p_threshold: self.p_threshold,
            allow_trivial: self.allow_trivial,
        }
    }
}

fn print_audit(report: &AuditReport, json: bool) {
    if json {
        println!("{}", serde_json::to_string(report).expect("serializable"));
    } else {
        let h = &report.hsic;
        println!("hsic statistic: {}", h.statistic);
        println!("p-value: {} ({} permutations, seed {})", h.p_value, h.permutations, h.seed);
        println!("max mean gap: {}", report.gaps.max_mean_gap);
        println!("max 1-d W2 gap: {}", report.gaps.max_w2_gap_1d);
        if report.vacuous {
            println!("vacuous: fewer than two atoms");
        }
    }
}

fn threshold_exit(report: &AuditReport, cfg: &RunConfig) -> ExitCode {
    if passes_threshold(report, cfg.p_threshold) {
        ExitCode::SUCCESS
    } else {
        eprintln!(
            "audit failed: p-value {} is below the threshold {}",
            report.hsic.p_value, cfg.p_threshold
        );
        ExitCode::from(EXIT_THRESHOLD)
    }
}

fn run(command: Command) -> Result<ExitCode, PipelineError> {
    match command {
        Command::Compile(args) => {
            let cfg = args.config();
            let c = pipeline::cmd_compile(&cfg)?;
            let summary = json!({
                "concepts": c.mask.n_concepts(),
                "atoms": c.partition.n_atoms(),
                "rows": c.mask.n_rows(),
                "missing_data_warnings": c.missing_cells,
            });
            if args.json {
                println!("{summary}");
            } else {
                println!("sensitive concepts (k): {}", c.mask.n_concepts());
                println!("atoms: {}", c.partition.n_atoms());
                println!("rows: {}", c.mask.n_rows());
                println!("missing-data warnings: {}", c.missing_cells);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Project(args) => {
            let cfg = args.config();
            let (_, p) = pipeline::cmd_project(&cfg)?;
            if args.json {
                println!("{}", pipeline::diagnostics_json(&p)?);
            } else {
                println!("method: {}", p.method);
                if let Some(plan) = &p.plan {
                    println!("epsilon: {}", plan.epsilon);
                    println!("iterations: {} (converged: {})", plan.iterations, plan.converged);
                    println!("marginal residual: {:e}", plan.marginal_residual);
                }
                println!("reconstruction error: {}", p.reconstruction_error);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Audit { run, raw } => {
            let cfg = run.config();
            let report = pipeline::cmd_audit(&cfg, raw)?;
            print_audit(&report, run.json);
            // Raw audits are expected to show dependence; only the representation is gated.
            Ok(if raw { ExitCode::SUCCESS } else { threshold_exit(&report, &cfg) })
        }
        Command::Certify(args) => {
            let cfg = args.config();
            let (chain, cert) = pipeline::cmd_certify(&cfg, chrono::Utc::now())?;
            if args.json {
                println!("{}", cert.to_canonical_json()?);
            } else {
                println!("wrote {}", cfg.out.join(pipeline::CERT_FILE).display());
                print_audit(&chain.audit, false);
            }
            Ok(threshold_exit(&chain.audit, &cfg))
        }
        Command::Verify(args) => {
            let bytes = std::fs::read(&args.cert).map_err(|source| PipelineError::Io {
                path: args.cert.clone(),
                source,
            })?;
            let report = verify_certificate(&bytes, &args.ontology, &args.binding, &args.data)?;
            if args.json {
                println!("{}", serde_json::to_string(&report).expect("serializable"));
            } else {
                println!("{report}");
            }
            Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(EXIT_MISMATCH) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
