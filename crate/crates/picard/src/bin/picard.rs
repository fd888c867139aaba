//! Command line front end: theorem drivers, certificate plumbing and small
//! utilities over the exact lattice library.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when a theorem
//! contract is violated (failed search, failed replay, broken invariant).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use picard::cremona::cremona_reduce;
use picard::error::{Error, Result};
use picard::harness::{report_emit, theorem1_run, theorem2_run, theorem3_search, Report};
use picard::kperp::{
    curve_table, nefness_test, sample_nef_point, sample_qperp_point, verify_nef_certificate,
    verify_non_nef_witness, NefCertificate, NefOutcome, NonNefWitness,
};
use picard::lattice::ClassVector;
use picard::uncollision::{
    canonical_shift, certify_good_ray, uncollide, verify_good_ray_certificate, GoodRayCertificate,
};

#[derive(Parser)]
#[command(
    name = "picard",
    version,
    about = "Exact computations with good rays on blowups of the plane"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the three-way nefness equivalence on sampled quadric classes.
    Theorem1 {
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Degree bound for the disjoint-curve search in the non-nef branch.
        #[arg(long, default_value_t = 6)]
        max_degree: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a 10-dimensional subspace of K-positive good rays and certify
    /// sampled rays on its quadric.
    Theorem2 {
        #[arg(long, default_value_t = 13)]
        s: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for de Fernex negative good rays on k^2 + 4 points.
    Theorem3 {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a certificate file written by nef-test or certify-good.
    VerifyCertificate { file: PathBuf },
    /// Enumerate (-1)-classes up to a degree bound.
    EnumerateCurves {
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 3)]
        max_degree: i64,
    },
    /// Run the Cremona reduction algorithm on a class.
    Reduce {
        #[command(flatten)]
        input: ClassInput,
    },
    /// Run the certified nefness test on an integral quadric class.
    NefTest {
        #[command(flatten)]
        input: ClassInput,
    },
    /// Apply the uncollision map to a class.
    Uncollide {
        #[command(flatten)]
        input: ClassInput,
        #[arg(long)]
        index: usize,
        #[arg(long)]
        factor: usize,
    },
    /// Certify the uncollision of a nef quadric class as a good ray.
    CertifyGood {
        #[command(flatten)]
        input: ClassInput,
        #[arg(long)]
        index: usize,
        #[arg(long)]
        factor: usize,
    },
    /// Quadric cone utilities.
    Qperp {
        #[command(subcommand)]
        cmd: QperpCmd,
    },
}

#[derive(Subcommand)]
enum QperpCmd {
    /// Sample integral points of the quadric cone.
    Sample {
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        bound: i64,
        /// Sample certified-nef points instead of generic ones.
        #[arg(long)]
        nef: bool,
    },
}

#[derive(Args)]
struct ClassInput {
    /// Inline JSON class, e.g. '{"s":10,"d":"6","m":["2","2",...]}'.
    #[arg(long, conflicts_with = "file")]
    class: Option<String>,
    /// Path to a JSON class file with the same schema.
    #[arg(long)]
    file: Option<PathBuf>,
}

impl ClassInput {
    fn load(&self) -> Result<ClassVector> {
        let text = match (&self.class, &self.file) {
            (Some(t), _) => t.clone(),
            (None, Some(p)) => std::fs::read_to_string(p).map_err(|e| Error::Io {
                context: format!("reading {}", p.display()),
                source: e,
            })?,
            (None, None) => {
                return Err(Error::InvalidDirection(
                    "provide a class via --class or --file".into(),
                ))
            }
        };
        serde_json::from_str(&text).map_err(|e| Error::Json {
            context: "parsing class".into(),
            source: e,
        })
    }
}

/// Self-contained certificate files: each embeds the class it talks about so
/// `verify-certificate` can replay it with no other inputs.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum CertificateFile {
    NefCertificate {
        class: ClassVector,
        certificate: NefCertificate,
    },
    NonNefWitness {
        class: ClassVector,
        witness: NonNefWitness,
    },
    GoodRay(GoodRayCertificate),
}

/// Usage and malformed-input errors exit 1; violated theorem contracts
/// (failed searches, failed replays, broken exact invariants) exit 2.
fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::BudgetExhausted(_)
        | Error::NotNegativeDefinite { .. }
        | Error::UnexpectedRank { .. }
        | Error::ReplayFailed(_)
        | Error::InvalidCertificate(_)
        | Error::NotCertifiedNef
        | Error::Internal(_) => 2,
        _ => 1,
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        context: "serializing output".into(),
        source: e,
    })?;
    println!("{text}");
    Ok(())
}

fn emit_or_print(report: &Report, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(dir) => {
            let files = report_emit(report, dir)?;
            println!("wrote {}", files.json.display());
            println!("wrote {}", files.rays_csv.display());
            println!("wrote {}", files.plot_csv.display());
            Ok(())
        }
        None => print_json(report),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Theorem1 {
            s,
            samples,
            seed,
            max_degree,
            out,
        } => {
            let report = theorem1_run(s, samples, seed, max_degree)?;
            println!(
                "theorem1: s = {s}, {} samples, all three conditions agree",
                report.rows.len()
            );
            emit_or_print(&Report::Theorem1(report), &out)
        }
        Cmd::Theorem2 {
            s,
            samples,
            seed,
            out,
        } => {
            let report = theorem2_run(s, samples, seed)?;
            println!(
                "theorem2: s = {s}, {} certified K-positive good rays{}",
                report.certificates.len(),
                match &report.proof.radical {
                    Some(r) => format!(", slice semidefinite with radical <{r}>"),
                    None => ", slice negative definite".into(),
                }
            );
            emit_or_print(&Report::Theorem2(report), &out)
        }
        Cmd::Theorem3 {
            k,
            budget,
            seed,
            out,
        } => {
            let report = theorem3_search(k, budget, seed)?;
            println!(
                "theorem3: k = {k}, found {} after {} candidates, {} perturbed negatives",
                report.primary.ray,
                report.attempts,
                report.perturbed.len()
            );
            emit_or_print(&Report::Theorem3(report), &out)
        }
        Cmd::VerifyCertificate { file } => {
            let text = std::fs::read_to_string(&file).map_err(|e| Error::Io {
                context: format!("reading {}", file.display()),
                source: e,
            })?;
            let cert: CertificateFile = serde_json::from_str(&text).map_err(|e| Error::Json {
                context: format!("parsing {}", file.display()),
                source: e,
            })?;
            match cert {
                CertificateFile::NefCertificate { class, certificate } => {
                    verify_nef_certificate(&class, &certificate)?;
                    println!("ok: nef certificate replays for {class}");
                }
                CertificateFile::NonNefWitness { class, witness } => {
                    verify_non_nef_witness(&class, &witness)?;
                    println!("ok: non-nef witness replays for {class}");
                }
                CertificateFile::GoodRay(cert) => {
                    verify_good_ray_certificate(&cert)?;
                    println!("ok: good-ray certificate replays for {}", cert.ray);
                }
            }
            Ok(())
        }
        Cmd::EnumerateCurves { s, max_degree } => {
            let curves = curve_table(s, max_degree);
            eprintln!(
                "{} (-1)-classes on {s} points up to degree {max_degree}",
                curves.len()
            );
            print_json(&curves)
        }
        Cmd::Reduce { input } => {
            let cls = input.load()?;
            let result = cremona_reduce(&cls)?;
            print_json(&result)
        }
        Cmd::NefTest { input } => {
            let cls = input.load()?;
            let outcome = nefness_test(&cls.to_ray()?)?;
            let file = match outcome {
                NefOutcome::Nef(certificate) => CertificateFile::NefCertificate {
                    class: cls,
                    certificate,
                },
                NefOutcome::NotNef(witness) => CertificateFile::NonNefWitness {
                    class: cls,
                    witness,
                },
            };
            print_json(&file)
        }
        Cmd::Uncollide {
            input,
            index,
            factor,
        } => {
            let cls = input.load()?;
            let shift = canonical_shift(&cls, index, factor)?;
            let image = uncollide(&cls, index, factor)?;
            eprintln!("canonical pairing shift: {shift}");
            print_json(&image)
        }
        Cmd::CertifyGood {
            input,
            index,
            factor,
        } => {
            let cls = input.load()?;
            let cert = certify_good_ray(&cls.to_ray()?, index, factor)?;
            verify_good_ray_certificate(&cert)?;
            print_json(&CertificateFile::GoodRay(cert))
        }
        Cmd::Qperp { cmd } => match cmd {
            QperpCmd::Sample {
                s,
                count,
                seed,
                bound,
                nef,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut points = Vec::with_capacity(count);
                for _ in 0..count {
                    let p = if nef {
                        sample_nef_point(s, &mut rng, bound, 4)?
                    } else {
                        sample_qperp_point(s, &mut rng, bound)
                    };
                    points.push(p);
                }
                print_json(&points)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version requests are not usage errors
            let benign = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if benign {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
