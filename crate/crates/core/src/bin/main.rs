use bochner_compact::error::Error;
use bochner_compact::scenarios::{
    parse_scenario, remark_family, remark_scalar_image_check, run_scenario, Analysis, ENormSpec,
    FamilySpec,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bochner-compact",
    about = "Quantitative compactness toolkit for discrete vector-valued Lp families",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct CommonOpts {
    /// scenario config file (JSON)
    #[arg(long)]
    scenario: PathBuf,
    /// override the configured prefix length
    #[arg(long)]
    prefix: Option<usize>,
    /// output directory for report files; stdout if omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run every analysis listed in a scenario config
    Analyze {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Extract a subsequence with a verified 7ε pairwise bound
    Extract {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value = "2.0")]
        p: f64,
        /// fixed truncation radius; extraction refuses when the measured
        /// tail modulus at this radius is not below epsilon
        #[arg(long)]
        r: Option<f64>,
    },
    /// Build and verify a uniform-integrability certificate
    CertifyUi {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value = "2.0")]
        p: f64,
    },
    /// Build and verify a tightness certificate
    CertifyTightness {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value = "2.0")]
        p: f64,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Search for a divergence witness for a non-tight family
    WitnessNontight {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        eps0: f64,
        #[arg(long)]
        delta0: f64,
        /// exponent of the weighted Lq function-space norm
        #[arg(long, default_value = "1.0")]
        e_q: f64,
    },
    /// Two-point counterexample family: grid statistics and the explicit
    /// scalar-image construction
    Remark {
        /// disk grid refinement level (spacing 2^-level)
        #[arg(long, default_value = "6")]
        level: u32,
        /// functional coefficients "c1,c2"
        #[arg(long)]
        c: Option<String>,
        /// target scalar image
        #[arg(long, default_value = "0.0", allow_hyphen_values = true)]
        y: f64,
        #[arg(long, default_value = "0.01")]
        resolution: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

fn load_family_spec(common: &CommonOpts) -> Result<FamilySpec, Error> {
    let text = std::fs::read_to_string(&common.scenario)?;
    let config = parse_scenario(&text)?;
    let mut family = config.family;
    if let Some(len) = common.prefix {
        if len == 0 {
            return Err(Error::Scenario("--prefix must be >= 1".into()));
        }
        family.prefix_length = len;
    }
    Ok(family)
}

fn run_single(common: &CommonOpts, analysis: Analysis) -> Result<(), Error> {
    let family = load_family_spec(common)?;
    let config = bochner_compact::scenarios::ScenarioConfig {
        schema_version: 1,
        family,
        analyses: vec![analysis],
    };
    let report = run_scenario(&config, common.out.as_deref())?;
    emit(
        serde_json::to_value(&report)?,
        common.format,
        common.out.is_some(),
    )
}

fn flatten_csv(prefix: &str, value: &serde_json::Value, rows: &mut Vec<(String, String)>) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_csv(&key, v, rows);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten_csv(&format!("{prefix}[{i}]"), v, rows);
            }
        }
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn emit(value: serde_json::Value, format: Format, wrote_files: bool) -> Result<(), Error> {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&value)?),
        Format::Csv => {
            let mut rows = Vec::new();
            flatten_csv("", &value, &mut rows);
            println!("key,value");
            for (k, v) in rows {
                println!("{k},{}", v.replace(',', ";"));
            }
        }
    }
    if wrote_files {
        eprintln!("report files written");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Analyze { common } => {
            let text = std::fs::read_to_string(&common.scenario)?;
            let mut config = parse_scenario(&text)?;
            if let Some(len) = common.prefix {
                if len == 0 {
                    return Err(Error::Scenario("--prefix must be >= 1".into()));
                }
                config.family.prefix_length = len;
            }
            let report = run_scenario(&config, common.out.as_deref())?;
            emit(
                serde_json::to_value(&report)?,
                common.format,
                common.out.is_some(),
            )
        }
        Command::Extract {
            common,
            epsilon,
            p,
            r,
        } => run_single(
            &common,
            Analysis::Theorem1 {
                p,
                eps: epsilon,
                r,
            },
        ),
        Command::CertifyUi { common, epsilon, p } => {
            run_single(&common, Analysis::CertifyUi { p, eps: epsilon })
        }
        Command::CertifyTightness {
            common,
            epsilon,
            p,
            n_max,
        } => run_single(
            &common,
            Analysis::CertifyTightness {
                p,
                eps: epsilon,
                n_max,
            },
        ),
        Command::WitnessNontight {
            common,
            eps0,
            delta0,
            e_q,
        } => run_single(
            &common,
            Analysis::WitnessNontight {
                eps0,
                delta0,
                e: ENormSpec {
                    kind: "lq".into(),
                    q: Some(e_q),
                    exponent: None,
                },
            },
        ),
        Command::Remark {
            level,
            c,
            y,
            resolution,
            out,
            format,
        } => {
            let rf = remark_family(level)?;
            let mut payload = json!({
                "level": level,
                "grid_points": rf.grid.count(),
                "member_count": rf.member_count(),
                "grid_spacing": rf.grid.spacing(),
            });
            if let Some(cs) = c {
                let parts: Vec<f64> = cs
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::Scenario(format!("bad --c entry: {e}")))
                    })
                    .collect::<Result<_, Error>>()?;
                let check = remark_scalar_image_check(&parts, y, resolution)?;
                payload["scalar_image_check"] = serde_json::to_value(&check)?;
            }
            if let Some(dir) = &out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(
                    dir.join("remark.json"),
                    serde_json::to_string_pretty(&payload)?,
                )?;
            }
            emit(payload, format, out.is_some())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_refusal() => {
            eprintln!("refusal: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
