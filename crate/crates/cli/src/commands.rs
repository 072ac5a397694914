use std::path::{Path, PathBuf};

use lora_maxmin::optimize::{evaluate_benchmark, iterative_balancing, zone_scenario};
use lora_maxmin::units::{linear_to_db, per_m2_to_per_km2};
use lora_maxmin::{
    model, BenchmarkScheme, BenchmarkSpec, DutyMode, DutyPlan, IbOptions, NetworkConfig, Partition,
    PowerPolicy, SfTable, SpreadingFactor, Termination, ThroughputReport,
};

use crate::config::{self, Scenario};
use crate::error::Failure;
use crate::output::{self, ProfileRow, RangeRow, ReportRow, Spatial};
use crate::plan::{resolve_partition, DutyChoice, PartitionChoice, PlanFile};
use crate::{Cli, Command, Common, McArgs, PlanArgs};

const DEFAULT_TRIALS: u64 = 100_000;
const DEFAULT_SEED: u64 = 1;
const DEFAULT_BIN_WIDTH_M: f64 = 25.0;

pub fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Ranges(common) => {
            let sc = scenario(&common)?;
            let rows = ranges(&sc.network, &sc.table)?;
            output::write_csv(&rows, out_path(&common, &sc).as_deref())
        }
        Command::Analyze { common, plan } => {
            let sc = scenario(&common)?;
            let rows = analyze(&sc, &plan, None)?;
            output::write_csv(&rows, out_path(&common, &sc).as_deref())
        }
        Command::Simulate { common, plan, mc } => {
            let sc = scenario(&common)?;
            let (trials, seed) = mc_params(&mc, &sc);
            let rows = analyze(&sc, &plan, Some((trials, seed)))?;
            output::write_csv(&rows, out_path(&common, &sc).as_deref())
        }
        Command::Optimize {
            common,
            plan,
            mc,
            plan_out,
        } => {
            let sc = scenario(&common)?;
            let validate = mc.trials.or(sc.run.trials).map(|t| (t, seed(&mc, &sc)));
            optimize(
                &sc,
                &plan,
                validate,
                plan_out.as_deref(),
                out_path(&common, &sc).as_deref(),
            )
        }
        Command::Benchmark {
            common,
            mc,
            scheme,
            bin_width,
            profile_out,
        } => {
            let sc = scenario(&common)?;
            let scheme = scheme.or(sc.run.scheme).unwrap_or(1);
            let bin_width = bin_width
                .or(sc.run.bin_width_m)
                .unwrap_or(DEFAULT_BIN_WIDTH_M);
            if !(bin_width.is_finite() && bin_width > 0.0) {
                return Err(Failure::Usage(format!(
                    "bin width must be positive, got {bin_width}"
                )));
            }
            let (trials, seed) = mc_params(&mc, &sc);
            let (rows, profile) = benchmark(&sc, scheme, bin_width, trials, seed)?;
            output::write_csv(&rows, out_path(&common, &sc).as_deref())?;
            if let Some(p) = profile_out {
                output::write_csv(&profile, Some(&p))?;
            }
            Ok(())
        }
    }
}

fn scenario(common: &Common) -> Result<Scenario, Failure> {
    match &common.config {
        Some(path) => Ok(config::load(path)?),
        None => Ok(Scenario::default()),
    }
}

fn out_path(common: &Common, sc: &Scenario) -> Option<PathBuf> {
    common.out.clone().or_else(|| sc.run.out.clone())
}

fn seed(mc: &McArgs, sc: &Scenario) -> u64 {
    mc.seed.or(sc.run.seed).unwrap_or(DEFAULT_SEED)
}

fn mc_params(mc: &McArgs, sc: &Scenario) -> (u64, u64) {
    (
        mc.trials.or(sc.run.trials).unwrap_or(DEFAULT_TRIALS),
        seed(mc, sc),
    )
}

fn partition_choice(plan: &PlanArgs, sc: &Scenario) -> Result<PartitionChoice, Failure> {
    match (&plan.partition, &sc.run.partition) {
        (Some(c), _) => Ok(c.clone()),
        (None, Some(s)) => s.parse().map_err(Failure::Usage),
        (None, None) => Ok(PartitionChoice::EqualArea),
    }
}

fn duty_choice(plan: &PlanArgs, sc: &Scenario) -> Result<DutyChoice, Failure> {
    match (&plan.duty, &sc.run.duty) {
        (Some(c), _) => Ok(c.clone()),
        (None, Some(s)) => s.parse().map_err(Failure::Usage),
        (None, None) => Ok(DutyChoice::Optimal),
    }
}

fn check_fixed(d: f64, cfg: &NetworkConfig) -> Result<f64, Failure> {
    if d > cfg.max_duty {
        return Err(Failure::Usage(format!(
            "fixed duty {d} exceeds max_duty {}",
            cfg.max_duty
        )));
    }
    Ok(d)
}

fn ranges(cfg: &NetworkConfig, table: &SfTable) -> Result<Vec<RangeRow>, Failure> {
    let equal = Partition::equal_area(cfg.cell_radius_m)?;
    SpreadingFactor::ALL
        .iter()
        .map(|&sf| {
            let p = table.get(sf);
            Ok(RangeRow {
                sf: sf.value(),
                bit_rate_bps: p.bit_rate(),
                snr_threshold_db: linear_to_db(p.snr_threshold),
                max_range_m: model::max_range(p, cfg)?,
                equal_area_range_m: equal.outer(sf),
            })
        })
        .collect()
}

/// Duty plans to evaluate, each with its experiment id.
fn duty_plans(
    choice: &DutyChoice,
    partition: &Partition,
    sc: &Scenario,
    base_id: &str,
) -> Result<Vec<(String, DutyPlan)>, Failure> {
    let cfg = &sc.network;
    let cap = cfg.max_duty;
    Ok(match choice {
        DutyChoice::Optimal => {
            let duties = std::array::from_fn(|i| {
                let sf = SpreadingFactor::from_index(i);
                zone_scenario(sf, partition, cfg, &sc.table, DutyMode::Optimal).duty
            });
            vec![(base_id.to_string(), DutyPlan::new(duties, cap)?)]
        }
        DutyChoice::Fixed(d) => {
            vec![(
                base_id.to_string(),
                DutyPlan::uniform(check_fixed(*d, cfg)?, cap)?,
            )]
        }
        DutyChoice::File(path) => vec![(
            base_id.to_string(),
            PlanFile::read(path)?.duties(path, cap)?,
        )],
        DutyChoice::Sweep(n) => (1..=*n)
            .map(|k| {
                let d = cap * k as f64 / *n as f64;
                Ok((format!("{base_id}:duty={d}"), DutyPlan::uniform(d, cap)?))
            })
            .collect::<Result<_, Failure>>()?,
    })
}

fn analyze(
    sc: &Scenario,
    plan: &PlanArgs,
    mc: Option<(u64, u64)>,
) -> Result<Vec<ReportRow>, Failure> {
    let cfg = &sc.network;
    let partition = resolve_partition(&partition_choice(plan, sc)?, cfg, &sc.table)?;
    let policy = PowerPolicy::max_power(&partition, cfg);
    let base = if mc.is_some() { "simulate" } else { "analyze" };
    let mut rows = Vec::new();
    for (id, duties) in duty_plans(&duty_choice(plan, sc)?, &partition, sc, base)? {
        let mut report = ThroughputReport::analytic(&partition, &duties, &policy, cfg, &sc.table);
        let spatial = match mc {
            Some((trials, seed)) => {
                report =
                    report.with_zone_mc(&partition, &duties, &policy, cfg, &sc.table, trials, seed);
                Spatial::MonteCarlo
            }
            None => Spatial::Analytic,
        };
        rows.extend(output::report_rows(&id, &report, spatial));
    }
    Ok(rows)
}

fn optimize(
    sc: &Scenario,
    plan: &PlanArgs,
    validate: Option<(u64, u64)>,
    plan_out: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let cfg = &sc.network;
    let initial = resolve_partition(&partition_choice(plan, sc)?, cfg, &sc.table)?;
    let mode = match duty_choice(plan, sc)? {
        DutyChoice::Optimal => DutyMode::Optimal,
        DutyChoice::Fixed(d) => DutyMode::Fixed(check_fixed(d, cfg)?),
        other => {
            return Err(Failure::Usage(format!(
                "optimize takes --duty optimal or fixed:<duty>, got {other:?}"
            )))
        }
    };
    let mut options = IbOptions::from_config(cfg);
    if let Some(n) = sc.run.ib_max_iterations {
        options.max_iterations = n;
    }
    let sol = iterative_balancing(cfg, &sc.table, &initial, mode, options)?;
    let policy = sol.power_policy(cfg);
    let mut report =
        ThroughputReport::analytic(&sol.partition, &sol.duties, &policy, cfg, &sc.table);
    if let Some((trials, seed)) = validate {
        report = report.with_zone_mc(
            &sol.partition,
            &sol.duties,
            &policy,
            cfg,
            &sc.table,
            trials,
            seed,
        );
    }
    output::write_csv(
        &output::report_rows("optimize", &report, Spatial::Analytic),
        out,
    )?;
    if let Some(p) = plan_out {
        PlanFile::new(&sol.partition, &sol.duties).write(p)?;
    }

    let termination = match &sol.termination {
        Termination::Balanced => "balanced".to_string(),
        Termination::Unreducible(gaps) => {
            let gaps: Vec<String> = gaps
                .iter()
                .map(|(sf, g)| format!("{sf}/+1 {g:.4}"))
                .collect();
            format!("unreducible gaps [{}]", gaps.join(", "))
        }
        Termination::IterationCap => "iteration cap".to_string(),
    };
    eprintln!("termination: {termination} after {} moves", sol.iterations);
    eprintln!("min throughput: {:.6} bps", sol.min_throughput);
    eprintln!(
        "spatial throughput: {:.4} bps/km2",
        per_m2_to_per_km2(sol.spatial_throughput(cfg, &sc.table))
    );
    if let Some(mc) = report.spatial_throughput_mc {
        eprintln!(
            "spatial throughput (MC): {:.4} +- {:.4} bps/km2",
            per_m2_to_per_km2(mc.mean),
            per_m2_to_per_km2(mc.std_error)
        );
    }
    if !sol.converged() {
        return Err(Failure::NotConverged(sol.iterations));
    }
    Ok(())
}

fn benchmark(
    sc: &Scenario,
    scheme: u8,
    bin_width: f64,
    trials: u64,
    seed: u64,
) -> Result<(Vec<ReportRow>, Vec<ProfileRow>), Failure> {
    let cfg = &sc.network;
    let spec = BenchmarkSpec::standard(BenchmarkScheme::from_id(scheme)?, cfg);
    let report = evaluate_benchmark(&spec, cfg, &sc.table, bin_width, trials, seed)?;
    let id = format!("benchmark-{scheme}");
    if let Some(mc) = report.spatial_throughput_mc {
        eprintln!(
            "scheme {scheme} spatial throughput: {:.4} +- {:.4} bps/km2",
            per_m2_to_per_km2(mc.mean),
            per_m2_to_per_km2(mc.std_error)
        );
    }
    Ok((
        output::report_rows(&id, &report, Spatial::MonteCarlo),
        output::profile_rows(&id, &report),
    ))
}
