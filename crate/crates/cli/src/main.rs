use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sdpme_core::estimates::{verify_log_estimate, verify_lower_energy, verify_upper_energy, CutoffSpec, GrowthBound};
use sdpme_core::io::config::{EstimateChoice, HolderModeChoice};
use sdpme_core::io::{export_report, Cell, Equation, Table};
use sdpme_core::regularity::{
    check_cylinder_conditions, degiorgi_dichotomy_check, fit_holder_exponent, generate_iterative_scheme,
    holder_seminorm, oscillation, DichotomyTolerance, HolderMode, SpaceTimeBox,
};
use sdpme_core::{
    biofilm::extract_biofilm_region, parse_config, run_biofilm, run_simulation, total_mass, validate_growth_bound,
    validate_hypotheses, BiofilmState, Cylinder, Error, Field, RunConfig, SnapshotFile, Trajectory,
};

#[derive(Parser)]
#[command(name = "sdpme", version, about = "Degenerate reaction-diffusion solver and regularity diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the scalar equation and write snapshots.
    Solve(Common),
    /// Integrate the coupled biomass/nutrient system.
    Biofilm(Common),
    /// Run the configured cylinder scans, Hölder fits and iteration schemes.
    Diagnose(Common),
    /// Evaluate both sides of the configured energy estimates.
    VerifyEstimates(Common),
    /// Fit structural constants and check the structural hypotheses.
    FitHypotheses(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run description.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config (default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress progress messages.
    #[arg(long)]
    quiet: bool,
}

struct Run {
    cfg: RunConfig,
    out: PathBuf,
    quiet: bool,
}

impl Run {
    fn load(args: &Common) -> Result<Self, Error> {
        let text = std::fs::read_to_string(&args.config).map_err(|e| Error::Io {
            path: args.config.clone(),
            source: e,
        })?;
        let cfg = parse_config(&text)?;
        let out = args
            .out
            .clone()
            .or_else(|| cfg.output.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        std::fs::create_dir_all(&out).map_err(|e| Error::Io {
            path: out.clone(),
            source: e,
        })?;
        let path = out.join("config.toml");
        std::fs::write(&path, cfg.to_toml()).map_err(|source| Error::Io { path, source })?;
        Ok(Run {
            cfg,
            out,
            quiet: args.quiet,
        })
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn export(&self, name: &str, report: &(impl sdpme_core::io::Tabular + ?Sized)) -> Result<(), Error> {
        export_report(report, self.path(name))?;
        self.say(format!("wrote {}", self.path(name).display()));
        Ok(())
    }
}

fn write_series(run: &Run, name: &str, traj: &Trajectory) -> Result<(), Error> {
    for (k, s) in traj.snapshots().iter().enumerate() {
        SnapshotFile::new(name, s.t, s.field.clone()).write(run.path(&format!("{name}_{k:05}.snap")))?;
    }
    run.say(format!("wrote {} {name} snapshots", traj.snapshots().len()));
    Ok(())
}

fn biofilm_initial(cfg: &RunConfig) -> Result<BiofilmState, Error> {
    let m = cfg.initial_field()?;
    let c = Field::constant(m.grid().clone(), cfg.biofilm.nutrient);
    BiofilmState::new(m, c, cfg.solver.t_start)
}

/// The trajectory that the diagnostics inspect: the solution, or the biomass.
fn evolve(run: &Run) -> Result<Trajectory, Error> {
    let cfg = &run.cfg;
    let traj = match cfg.equation {
        Equation::Scalar => {
            run_simulation(&cfg.initial_field()?, &cfg.nonlinearity()?, &cfg.reaction_term()?, &cfg.solver_config()?)?
        }
        Equation::Biofilm => {
            let bc = cfg.biofilm.nutrient_bc.resolve()?;
            run_biofilm(&biofilm_initial(cfg)?, &cfg.biofilm.params(), &cfg.solver_config()?, &bc)?.biomass
        }
    };
    run.say(format!("integrated to t = {} in {} steps", traj.t_end(), traj.monitor.steps));
    Ok(traj)
}

fn solve(run: &Run) -> Result<(), Error> {
    if run.cfg.equation != Equation::Scalar {
        return Err(Error::Validation("`solve` needs equation = \"scalar\"; use `biofilm`".into()));
    }
    let traj = evolve(run)?;
    write_series(run, "u", &traj)?;
    run.export("summary.tsv", &traj)?;
    run.export("monitor.tsv", &traj.monitor)
}

fn biofilm(run: &Run) -> Result<(), Error> {
    let cfg = &run.cfg;
    if cfg.equation != Equation::Biofilm {
        return Err(Error::Validation("`biofilm` needs equation = \"biofilm\"".into()));
    }
    let bc = cfg.biofilm.nutrient_bc.resolve()?;
    let out = run_biofilm(&biofilm_initial(cfg)?, &cfg.biofilm.params(), &cfg.solver_config()?, &bc)?;
    run.say(format!("integrated to t = {} in {} steps", out.biomass.t_end(), out.monitor().steps));
    write_series(run, "biomass", &out.biomass)?;
    write_series(run, "nutrient", &out.nutrient)?;
    let mut table = Table::new(vec!["t", "biomass_mass", "region_measure", "region_cells", "max_biomass", "min_nutrient"]);
    for (m, c) in out.biomass.snapshots().iter().zip(out.nutrient.snapshots()) {
        let region = extract_biofilm_region(&m.field, cfg.biofilm.region_tol);
        table.push(vec![
            Cell::from(m.t),
            Cell::from(total_mass(&m.field)),
            Cell::from(region.measure),
            Cell::from(region.cells.len()),
            Cell::from(m.field.max()),
            Cell::from(c.field.min()),
        ]);
    }
    run.export("summary.tsv", &table)?;
    run.export("monitor.tsv", out.monitor())
}

/// Smallest `omega >= R^{1/m}` that bounds the oscillation and `4 mu_-` over
/// the intrinsic cylinder it defines.
fn fitted_omega(traj: &Trajectory, center: &[f64], t0: f64, r: f64, m: f64) -> Result<f64, Error> {
    let mut omega = r.powf(1.0 / m) * (1.0 + 1e-9);
    for _ in 0..50 {
        let o = oscillation(traj, &Cylinder::intrinsic(center, t0, r, omega, m)?)?;
        let need = o.essosc.max(4.0 * o.mu_minus) * (1.0 + 1e-9);
        if need <= omega {
            return Ok(omega);
        }
        omega = need;
    }
    Err(Error::Precondition(format!("no admissible omega for the cylinder of radius {r} at t = {t0}")))
}

fn diagnose(run: &Run) -> Result<(), Error> {
    let cfg = &run.cfg;
    let nl = cfg.nonlinearity()?;
    let rt = cfg.reaction_term()?;
    let sc = cfg.structural_constants(&nl)?;
    let dgc = cfg.degiorgi_constants(&sc, &rt)?;
    let m = cfg.exponent(&nl)?;
    run.export("constants.tsv", &dgc)?;
    let traj = evolve(run)?;
    let tol = DichotomyTolerance::grid(traj.grid().h_max());
    let mu = cfg.structure.mu;

    let mut scans = Table::new(vec![
        "index", "radius", "omega", "mu_minus", "essosc", "conditions", "branch", "conclusion_holds", "note",
    ]);
    for (i, scan) in cfg.diagnostics.cylinders.iter().enumerate() {
        let center = cfg.point_or_center(&scan.center);
        let omega = match scan.omega {
            Some(w) => w,
            None => fitted_omega(&traj, &center, scan.t0, scan.radius, m)?,
        };
        let cyl = Cylinder::intrinsic(&center, scan.t0, scan.radius, omega, m)?;
        if !cyl.fits_in(&traj) {
            return Err(Error::Precondition(format!("cylinder {i} leaves the computed domain")));
        }
        let osc = oscillation(&traj, &cyl)?;
        let cond = check_cylinder_conditions(&traj, &cyl, mu)?;
        run.export(&format!("conditions_{i:03}.tsv"), &cond)?;
        let (branch, holds, note) = if !cond.all_passed() {
            ("-".to_string(), Cell::from("-"), "conditions not met".to_string())
        } else if scan.radius > dgc.r_max {
            ("-".to_string(), Cell::from("-"), format!("radius exceeds R_max = {:.6e}", dgc.r_max))
        } else {
            let d = degiorgi_dichotomy_check(&traj, &cyl, &dgc, mu, &tol)?;
            run.export(&format!("dichotomy_{i:03}.tsv"), &d)?;
            (format!("{:?}", d.branch), Cell::from(d.conclusion_holds), String::new())
        };
        scans.push(vec![
            Cell::from(i),
            Cell::from(scan.radius),
            Cell::from(omega),
            Cell::from(osc.mu_minus),
            Cell::from(osc.essosc),
            Cell::from(cond.all_passed()),
            Cell::from(branch),
            holds,
            Cell::from(note),
        ]);
    }
    run.export("cylinders.tsv", &scans)?;

    let mut alpha = None;
    for (i, fit) in cfg.diagnostics.holder.iter().enumerate() {
        if fit.count < 2 || !(fit.r_min > 0.0 && fit.r_max > fit.r_min) {
            return Err(Error::Validation(format!("holder fit {i} needs count >= 2 and 0 < r_min < r_max")));
        }
        let ratio = (fit.r_max / fit.r_min).powf(1.0 / (fit.count - 1) as f64);
        let radii: Vec<f64> = (0..fit.count).map(|k| fit.r_min * ratio.powi(k as i32)).collect();
        let mode = match fit.mode {
            HolderModeChoice::Classical => HolderMode::Classical { theta: fit.theta },
            HolderModeChoice::Intrinsic => HolderMode::Intrinsic { omega: fit.omega, m },
        };
        let report = fit_holder_exponent(&traj, &cfg.point_or_center(&fit.center), fit.t0, &radii, mode)?;
        alpha.get_or_insert(report.alpha_hat);
        run.export(&format!("holder_{i:03}.tsv"), &report)?;
    }

    for (i, s) in cfg.diagnostics.schemes.iter().enumerate() {
        let steps = generate_iterative_scheme(s.r0, s.omega0, &dgc, s.n_max, s.switch_at)?;
        run.export(&format!("scheme_{i:03}.tsv"), &steps[..])?;
    }

    if cfg.diagnostics.seminorm_pairs > 0 {
        // inner half of the domain over the second half of the run
        let g = &cfg.grid;
        let quarter = |k: usize, s: f64| g.lo[k] + s * (g.hi[k] - g.lo[k]);
        let b = SpaceTimeBox {
            lo: (0..g.lo.len()).map(|k| quarter(k, 0.25)).collect(),
            hi: (0..g.lo.len()).map(|k| quarter(k, 0.75)).collect(),
            t_lo: 0.5 * (traj.t_start() + traj.t_end()),
            t_hi: traj.t_end(),
        };
        let a = alpha.unwrap_or(0.5).max(1e-3);
        let value = holder_seminorm(&traj, &b, a, cfg.diagnostics.seminorm_pairs)?;
        let mut table = Table::new(vec!["alpha", "seminorm"]);
        table.push(vec![Cell::from(a), Cell::from(value)]);
        run.export("seminorm.tsv", &table)?;
    }
    Ok(())
}

fn integer_level(v: f64, what: &str) -> Result<u32, Error> {
    if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as u32)
    } else {
        Err(Error::Validation(format!("log estimate level {what} must be a positive integer, got {v}")))
    }
}

fn verify_estimates(run: &Run) -> Result<(), Error> {
    let cfg = &run.cfg;
    let nl = cfg.nonlinearity()?;
    let rt = cfg.reaction_term()?;
    let sc = cfg.structural_constants(&nl)?;
    let m = cfg.exponent(&nl)?;
    let growth = GrowthBound::from(&rt);
    let traj = evolve(run)?;
    let mut summary = Table::new(vec!["index", "kind", "lhs", "rhs", "ratio", "ratio_product", "vacuous"]);
    for (i, e) in cfg.diagnostics.estimates.iter().enumerate() {
        let cyl = Cylinder::intrinsic(&cfg.point_or_center(&e.center), e.t0, e.radius, e.omega, m)?;
        let report = match e.kind {
            EstimateChoice::Lower => {
                verify_lower_energy(&traj, &sc, growth, &CutoffSpec::new(cyl, e.plateau, &traj)?, e.k, e.l)?
            }
            EstimateChoice::Upper => {
                verify_upper_energy(&traj, &sc, growth, &CutoffSpec::new(cyl, e.plateau, &traj)?, e.k)?
            }
            EstimateChoice::Log => verify_log_estimate(
                &traj,
                &sc,
                growth,
                &CutoffSpec::spatial(cyl, e.plateau, &traj)?,
                integer_level(e.k, "k")?,
                integer_level(e.l, "l")?,
                e.t,
                e.tau,
            )?,
        };
        let side = |terms: &[(String, f64)]| terms.iter().fold(0.0, |acc, (_, v)| acc + v);
        summary.push(vec![
            Cell::from(i),
            Cell::from(format!("{:?}", e.kind).to_lowercase()),
            Cell::from(side(&report.lhs_terms)),
            Cell::from(side(&report.rhs_terms)),
            Cell::from(report.ratio),
            Cell::from(report.ratio_product),
            Cell::from(report.vacuous),
        ]);
        run.export(&format!("estimate_{i:03}.tsv"), &report)?;
    }
    run.export("estimates.tsv", &summary)
}

fn fit_hypotheses(run: &Run) -> Result<(), Error> {
    let cfg = &run.cfg;
    let nl = cfg.nonlinearity()?;
    let rt = cfg.reaction_term()?;
    let sc = cfg.structural_constants(&nl)?;
    run.export("structural.tsv", &sc)?;
    let hyp = validate_hypotheses(&nl, &sc);
    run.export("hypotheses.tsv", &hyp)?;
    let growth = validate_growth_bound(&rt, &sc, cfg.structure.samples.max(64))?;
    run.export("growth.tsv", &growth)?;
    let dgc = cfg.degiorgi_constants(&sc, &rt)?;
    run.export("constants.tsv", &dgc)?;
    let failed: Vec<&str> = hyp.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if !failed.is_empty() {
        return Err(Error::Validation(format!("structural hypotheses failed: {}", failed.join(", "))));
    }
    if !growth.passed() {
        return Err(Error::Validation(format!(
            "growth bound fails: minimal L = {:e}, declared L = {:e}, m0 = {}, m = {}",
            growth.minimal_l, growth.declared_l, growth.exponent_m0, growth.m
        )));
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    if err.is_numerical() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, action): (&Common, fn(&Run) -> Result<(), Error>) = match &cli.command {
        Command::Solve(a) => (a, solve),
        Command::Biofilm(a) => (a, biofilm),
        Command::Diagnose(a) => (a, diagnose),
        Command::VerifyEstimates(a) => (a, verify_estimates),
        Command::FitHypotheses(a) => (a, fit_hypotheses),
    };
    let result = Run::load(args).and_then(|run| action(&run));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
