mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use gcp_core::packets::{self, PacketModel};
use gcp_core::routing::{SplitKind, SplitSpec};
use gcp_core::superpose::{merge, origin_probability, MergeFamily};
use gcp_core::verify::{self, Suite};
use gcp_core::{pmf, scenario, simulate, splitting, thinning, RateVector};

use config::ScenarioConfig;
use output::{Output, Table};

/// Mass allowed beyond the default `--n-max`.
const DEFAULT_TAIL: f64 = 1e-12;

#[derive(Parser)]
#[command(
    name = "gcp",
    version,
    about = "Generalized counting processes: distributions, merging, splitting, simulation"
)]
struct Cli {
    /// Emit one JSON object per record instead of CSV.
    #[arg(long, global = true)]
    json: bool,
    /// TOML configuration with named rates, splits and scenario parameters.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// State probabilities p(n, t).
    Pmf {
        #[arg(long)]
        rates: String,
        #[arg(long)]
        t: f64,
        /// Largest n to print; defaults to a point beyond which at most 1e-12 mass remains.
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Probability generating function G(u, t).
    Pgf {
        #[arg(long)]
        rates: String,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        u: f64,
    },
    /// Mean and variance at time t.
    Moments {
        #[arg(long)]
        rates: String,
        #[arg(long)]
        t: f64,
    },
    /// Merged rates of independent processes and origin probabilities of each jump size.
    Merge {
        /// One component per occurrence.
        #[arg(long, required = true)]
        rates: Vec<String>,
    },
    /// Probability that a jump of the given size came from the given component.
    Origin {
        #[arg(long, required = true)]
        rates: Vec<String>,
        /// 1-based component index.
        #[arg(long)]
        source: usize,
        #[arg(long)]
        jump: usize,
    },
    /// Component rates after random splitting.
    Split {
        #[arg(long)]
        rates: String,
        /// Routing probabilities, or a single p for the coin (p, 1-p).
        #[arg(long)]
        p: String,
        /// 1: each event goes to one component. 2: each unit of an event is routed separately.
        #[arg(long = "type", default_value = "1")]
        kind: SplitKind,
        /// Time at which covariances are reported.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Joint law of the events of one component and the merged total.
    Packet {
        #[arg(long, required = true)]
        rates: Vec<String>,
        #[arg(long)]
        source: usize,
        #[arg(long)]
        t: f64,
        /// Largest merged count n in the joint table.
        #[arg(long)]
        n_max: Option<usize>,
        /// Also print the law of the source's share given b merged events.
        #[arg(long)]
        b: Option<usize>,
    },
    /// Sample paths on [0, t].
    Simulate {
        #[arg(long)]
        rates: String,
        #[arg(long)]
        t: f64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        paths: u64,
        #[arg(long)]
        seed: Option<u64>,
        /// Print the empirical distribution of M(t) instead of the paths.
        #[arg(long)]
        summary: bool,
    },
    /// Run the verification suite; exits with status 1 if any check fails.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Worked applications using the [fishing] and [hotel] configuration sections.
    Scenario {
        name: ScenarioName,
        /// Overrides the horizon from the configuration.
        #[arg(long)]
        t: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioName {
    Fishing,
    Hotel,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((text, ok)) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::FAILURE;
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(String, bool)> {
    let config = ScenarioConfig::load(cli.config.as_deref())?;
    let mut out = Output::new(cli.json);
    let mut ok = true;
    match cli.command {
        Command::Pmf { rates, t, n_max } => {
            let rates = config.rate_vector(&rates)?;
            let n_max = n_max.unwrap_or_else(|| pmf::truncation_point(&rates, t, DEFAULT_TAIL));
            let probs = pmf::pmf_recurrence(&rates, n_max, t)?;
            let mut table = Table::new("pmf", &["n", "p"]);
            for (n, p) in probs.into_iter().enumerate() {
                table.row(cells![n, p]);
            }
            out.table(table);
        }
        Command::Pgf { rates, t, u } => {
            let rates = config.rate_vector(&rates)?;
            let mut table = Table::new("pgf", &["u", "t", "g"]);
            table.row(cells![u, t, pmf::pgf(&rates, u, t)?]);
            out.table(table);
        }
        Command::Moments { rates, t } => {
            let rates = config.rate_vector(&rates)?;
            gcp_core::error::check_time(t)?;
            let mut table = Table::new("moments", &["quantity", "value"]);
            table.row(cells!["mean", pmf::mean(&rates, t)]);
            table.row(cells!["variance", pmf::variance(&rates, t)]);
            out.table(table);
        }
        Command::Merge { rates } => {
            let family = family(&config, &rates)?;
            merge_tables(&mut out, &family)?;
        }
        Command::Origin { rates, source, jump } => {
            let family = family(&config, &rates)?;
            let mut table = Table::new("origin", &["source", "j", "probability"]);
            table.row(cells![source, jump, origin_probability(&family, source, jump)?]);
            out.table(table);
        }
        Command::Split { rates, p, kind, t } => {
            let rates = config.rate_vector(&rates)?;
            let spec = config.split(&p)?;
            split_tables(&mut out, &rates, &spec, kind, t)?;
        }
        Command::Packet { rates, source, t, n_max, b } => {
            let model = PacketModel::new(family(&config, &rates)?, source)?;
            packet_tables(&mut out, &model, t, n_max, b)?;
        }
        Command::Simulate { rates, t, paths, seed, summary } => {
            let rates = config.rate_vector(&rates)?;
            let seed = config.seed(seed);
            let count = usize::try_from(paths).context("--paths")?;
            let sampled = simulate::sample_paths(&rates, t, seed, count)?;
            if summary {
                let emp = simulate::empirical_distribution(&sampled, t)?;
                let mut table = Table::new("empirical", &["n", "count", "frequency", "p"]);
                let exact = pmf::pmf_recurrence(&rates, emp.max_value() as usize, t)?;
                for (&n, &c) in emp.counts() {
                    table.row(cells![n, c, emp.frequency(n), exact[n as usize]]);
                }
                out.table(table);
            } else if cli.json {
                for (i, path) in sampled.iter().enumerate() {
                    let mut value = serde_json::to_value(path)?;
                    value["path"] = serde_json::Value::from(i);
                    out.raw(&value.to_string());
                    out.raw("\n");
                }
            } else {
                for path in &sampled {
                    out.raw(&path.to_string());
                }
            }
        }
        Command::Verify { suite, seed, paths } => {
            let vc = config.verify_config(config.seed(seed), paths);
            let report = verify::run(suite, &vc)?;
            ok = report.passed();
            if cli.json {
                for check in &report.checks {
                    out.raw(&serde_json::to_string(check)?);
                    out.raw("\n");
                }
                let summary = serde_json::json!({
                    "suite": report.suite,
                    "config": report.config,
                    "checks": report.checks.len(),
                    "passed": report.checks.iter().filter(|c| c.passed).count(),
                    "result": if ok { "PASS" } else { "FAIL" },
                });
                out.raw(&summary.to_string());
                out.raw("\n");
            } else {
                out.raw(&report.to_string());
                out.raw("\n");
            }
        }
        Command::Scenario { name, t } => match name {
            ScenarioName::Fishing => {
                let mut params = config.fishing_params()?;
                params.t = t.unwrap_or(params.t);
                fishing_tables(&mut out, &params)?;
            }
            ScenarioName::Hotel => {
                let mut params = config.hotel_params()?;
                params.t = t.unwrap_or(params.t);
                hotel_tables(&mut out, &params)?;
            }
        },
    }
    Ok((out.into_string(), ok))
}

fn family(config: &ScenarioConfig, specs: &[String]) -> Result<MergeFamily> {
    let components = specs.iter().map(|s| config.rate_vector(s)).collect::<Result<Vec<_>>>()?;
    Ok(MergeFamily::new(components)?)
}

fn merge_tables(out: &mut Output, family: &MergeFamily) -> Result<()> {
    let merged = merge(family);
    let mut beta = Table::new("merged", &["j", "beta"]);
    for (j, b) in merged.iter() {
        beta.row(cells![j, b]);
    }
    out.table(beta);
    let mut origin = Table::new("origin", &["source", "j", "probability"]);
    for source in 1..=family.len() {
        for (j, b) in merged.iter() {
            // jumps of a size no component produces have no origin
            if b > 0.0 {
                origin.row(cells![source, j, origin_probability(family, source, j)?]);
            }
        }
    }
    out.table(origin);
    Ok(())
}

fn split_tables(out: &mut Output, rates: &RateVector, spec: &SplitSpec, kind: SplitKind, t: f64) -> Result<()> {
    let mut table = Table::new("split", &["component", "j", "rate"]);
    for i in 1..=spec.len() {
        let component = match kind {
            SplitKind::Packet => thinning::type1_component_rates(rates, spec, i)?,
            SplitKind::Unit => splitting::type2_component_rates(rates, spec, i)?,
        };
        for (j, r) in component.iter() {
            table.row(cells![i, j, r]);
        }
    }
    out.table(table);
    if kind == SplitKind::Unit {
        let mut cov = Table::new("covariance", &["x", "y", "t", "covariance"]);
        for x in 1..=spec.len() {
            for y in x + 1..=spec.len() {
                cov.row(cells![x, y, t, splitting::type2_covariance(rates, spec, x, y, t)?]);
            }
        }
        out.table(cov);
    }
    Ok(())
}

fn packet_tables(out: &mut Output, model: &PacketModel, t: f64, n_max: Option<usize>, b: Option<usize>) -> Result<()> {
    let merged = merge(model.family());
    let n_max = n_max.unwrap_or_else(|| pmf::truncation_point(&merged, t, DEFAULT_TAIL));
    let mut joint = Table::new("joint", &["a", "n", "p"]);
    for n in 0..=n_max {
        for a in 0..=n {
            joint.row(cells![a, n, packets::packet_joint_pmf(model, a, n, t)?]);
        }
    }
    out.table(joint);
    let mut summary = Table::new("summary", &["quantity", "value"]);
    summary.row(cells!["lambda_source", model.lambda_source()]);
    summary.row(cells!["lambda_total", model.lambda_total()]);
    summary.row(cells!["covariance", packets::packet_covariance(model, t)?]);
    summary.row(cells!["correlation", packets::packet_correlation(model)]);
    out.table(summary);
    if let Some(b) = b {
        let mut cond = Table::new("conditional", &["a", "b", "p"]);
        for (a, p) in packets::conditional_source_row(model, b).into_iter().enumerate() {
            cond.row(cells![a, b, p]);
        }
        out.table(cond);
    }
    Ok(())
}

fn fishing_tables(out: &mut Output, params: &scenario::FishingParams) -> Result<()> {
    let report = scenario::fishing(params)?;
    let mut merged = Table::new("merged", &["j", "beta"]);
    for (j, b) in report.merged_rates.iter() {
        merged.row(cells![j, b]);
    }
    out.table(merged);
    let mut types = Table::new("fish_types", &["fish_type", "expected_catches", "expected_given_catches"]);
    for (i, e) in report.expected_catches.iter().enumerate() {
        let cond = match &report.conditional_catches {
            Some(c) => output::Cell::Real(c[i]),
            None => output::Cell::Text(String::new()),
        };
        types.row(vec![output::Cell::from(i + 1), output::Cell::Real(*e), cond]);
    }
    out.table(types);
    let mut summary = Table::new("summary", &["quantity", "value"]);
    summary.row(cells!["t", params.t]);
    summary.row(cells!["expected_fish", report.expected_fish]);
    if let Some(b) = params.catches {
        summary.row(cells!["catches", b]);
    }
    out.table(summary);
    Ok(())
}

fn hotel_tables(out: &mut Output, params: &scenario::HotelParams) -> Result<()> {
    let report = scenario::hotel(params)?;
    for (name, rooms) in [("same_type", &report.same_type), ("mixed_types", &report.mixed_types)] {
        let mut table = Table::new(name, &["room_type", "j", "rate"]);
        for room in rooms {
            for (j, r) in room.rates.iter().enumerate() {
                table.row(cells![room.room_type, j + 1, *r]);
            }
        }
        out.table(table);
    }
    let mut summary = Table::new("expected_bookings", &["room_type", "same_type", "mixed_types"]);
    for (s, m) in report.same_type.iter().zip(&report.mixed_types) {
        if s.room_type != m.room_type {
            bail!("room types out of order");
        }
        summary.row(cells![s.room_type, s.expected_bookings, m.expected_bookings]);
    }
    summary.row(cells!["all", report.expected_bookings, report.expected_bookings]);
    out.table(summary);
    Ok(())
}
