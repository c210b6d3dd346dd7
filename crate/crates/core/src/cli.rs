//! Subcommands of the `gcm-peres` binary.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::assembly::Operator;
use crate::classical::{freg, l2_bounds, l2_section_map, poincare_section, Mesh};
use crate::config::{ConfigError, RunConfig};
use crate::error::GcmError;
use crate::output::{fmt_f64, CsvTable, OutputSet, ResultManifest, Timings};
use crate::spectra::{self, Coordinates, Grid};
use crate::stats;

#[derive(Debug, Parser)]
#[command(name = "gcm-peres", version, about = "Peres lattices and classical chaos of the geometric collective model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// TOML run configuration
    #[arg(short, long, value_name = "FILE")]
    pub config: PathBuf,
    /// Override a config key, e.g. `--set model.b=0.24`
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues with convergence flags
    Spectrum(ConfigArgs),
    /// Peres-operator expectation values of converged levels
    Lattice(ConfigArgs),
    /// Squared wave functions on a grid
    Wavefunction(ConfigArgs),
    /// Poincaré section crossings
    Poincare(ConfigArgs),
    /// Map of the classical time-averaged L² over the section
    L2map(ConfigArgs),
    /// Regular fraction of the section versus energy
    Freg(ConfigArgs),
    /// Range of the classical time-averaged L² versus B
    Bounds(ConfigArgs),
    /// Brody fit of unfolded spacings
    Brody(ConfigArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Lattice(_) => "lattice",
            Command::Wavefunction(_) => "wavefunction",
            Command::Poincare(_) => "poincare",
            Command::L2map(_) => "l2map",
            Command::Freg(_) => "freg",
            Command::Bounds(_) => "bounds",
            Command::Brody(_) => "brody",
        }
    }

    pub fn args(&self) -> &ConfigArgs {
        match self {
            Command::Spectrum(a)
            | Command::Lattice(a)
            | Command::Wavefunction(a)
            | Command::Poincare(a)
            | Command::L2map(a)
            | Command::Freg(a)
            | Command::Bounds(a)
            | Command::Brody(a) => a,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Numerical { context: String, source: GcmError },
    #[error("cannot write output in {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output { .. } => Self::CONFIG,
            // errors that only bad inputs can cause
            CliError::Numerical { source: GcmError::InvalidParameter(_) | GcmError::EnergyBelowMinimum { .. }, .. } => Self::CONFIG,
            CliError::Numerical { .. } => Self::NUMERICAL,
        }
    }

    pub fn is_config(&self) -> bool {
        self.exit_code() == Self::CONFIG
    }
}

trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for crate::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical { context: what(), source })
    }
}

fn operator_column(op: Operator) -> &'static str {
    match op {
        Operator::L2 => "p_l2",
        Operator::HPrime => "p_hprime",
        Operator::H0 => "p_h0",
        Operator::H => "p_h",
    }
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

/// Loads the configuration and runs one subcommand, returning its manifest.
pub fn run(command: &Command) -> Result<ResultManifest, CliError> {
    let start = Instant::now();
    let args = command.args();
    let config = RunConfig::load(&args.config, &args.overrides)?;
    let dir = config.output_directory();
    let io_err = |source| CliError::Output { path: dir.clone(), source };
    let mut out = OutputSet::create(&dir, config.output.format_version).map_err(io_err)?;

    let tables = match command {
        Command::Spectrum(_) => spectrum(&config)?,
        Command::Lattice(_) => lattice(&config)?,
        Command::Wavefunction(_) => wavefunction(&config)?,
        Command::Poincare(_) => poincare(&config)?,
        Command::L2map(_) => l2map(&config)?,
        Command::Freg(_) => regular_fraction(&config)?,
        Command::Bounds(_) => bounds(&config)?,
        Command::Brody(_) => brody(&config)?,
    };
    let compute_seconds = start.elapsed().as_secs_f64();
    for (name, product) in &tables {
        match product {
            Product::Csv(t) => out.write_csv(name, t),
            Product::Bytes(b) => out.write_bytes(name, b),
            Product::Json(v) => out.write_json(name, v),
        }
        .map_err(io_err)?;
    }
    let timings = Timings { compute_seconds, total_seconds: start.elapsed().as_secs_f64() };
    out.finish(command.name(), &config, timings).map_err(io_err)
}

pub enum Product {
    Csv(CsvTable),
    Bytes(Vec<u8>),
    Json(serde_json::Value),
}

type Products = Vec<(String, Product)>;

fn describe_model(t: &mut CsvTable, config: &RunConfig) {
    let m = &config.model;
    t.comment("model", format!("a={} b={} c={} hbar={} mass={}", m.a, m.b, m.c, m.hbar, m.mass));
}

fn spectrum(config: &RunConfig) -> Result<Products, CliError> {
    let length = config.length().context(|| "oscillator length".into())?;
    let (energies, n_converged) =
        spectra::solve_energies(&config.model, config.quantization, config.basis.n_max, length).context(|| "spectrum".into())?;
    let mut t = CsvTable::new(&["index", "energy", "converged"]);
    describe_model(&mut t, config);
    t.comment("quantization", config.quantization)
        .comment("n_max", config.basis.n_max)
        .comment("length", fmt_f64(length))
        .comment("n_converged", n_converged);
    for (i, e) in energies.iter().enumerate() {
        t.push(vec![i.to_string(), fmt_f64(*e), flag(i < n_converged)]);
    }
    Ok(vec![("spectrum.csv".into(), Product::Csv(t))])
}

fn solve(config: &RunConfig) -> Result<spectra::EigenSolution, CliError> {
    let length = config.length().context(|| "oscillator length".into())?;
    spectra::solve(&config.model, config.quantization, config.basis.n_max, length).context(|| "diagonalization".into())
}

fn lattice(config: &RunConfig) -> Result<Products, CliError> {
    let sol = solve(config)?;
    let mut operators = config.lattice.operators.clone();
    operators.dedup();
    let columns: Vec<Vec<f64>> = operators
        .iter()
        .map(|op| {
            spectra::peres_lattice(&sol, *op)
                .map(|l| l.rows.iter().map(|r| r.value).collect())
                .context(|| format!("lattice of {op:?}"))
        })
        .collect::<Result<_, _>>()?;
    let mut header = vec!["index", "energy"];
    header.extend(operators.iter().map(|op| operator_column(*op)));
    let mut t = CsvTable::new(&header);
    describe_model(&mut t, config);
    t.comment("quantization", config.quantization)
        .comment("n_max", config.basis.n_max)
        .comment("length", fmt_f64(sol.meta.length))
        .comment("n_converged", sol.n_converged);
    for i in 0..sol.n_converged {
        let mut row = vec![i.to_string(), fmt_f64(sol.energies[i])];
        row.extend(columns.iter().map(|c| fmt_f64(c[i])));
        t.push(row);
    }
    Ok(vec![("lattice.csv".into(), Product::Csv(t))])
}

fn wavefunction(config: &RunConfig) -> Result<Products, CliError> {
    let sol = solve(config)?;
    let wf = &config.wavefunction;
    let mut products = Products::new();
    for &level in &wf.levels {
        if level >= sol.n_converged {
            return Err(CliError::Numerical {
                context: format!("wave function of level {level}"),
                source: GcmError::LevelNotConverged { index: level, n_converged: sol.n_converged },
            });
        }
        let mut grid = spectra::default_grid(&sol, level, wf.resolution).context(|| format!("grid of level {level}"))?;
        if let Some(r) = wf.x_range {
            grid.x_range = r;
        }
        if let Some(r) = wf.y_range {
            grid.y_range = r;
        }
        let field = spectra::wavefunction_density(&sol, level, &grid).context(|| format!("wave function of level {level}"))?;
        let header = match field.coordinates {
            Coordinates::Cartesian => ["x", "y", "density"],
            Coordinates::Polar => ["beta", "gamma", "density"],
        };
        let mut t = CsvTable::new(&header);
        describe_model(&mut t, config);
        let Grid { x_range, y_range, nx, ny } = field.grid;
        t.comment("quantization", config.quantization)
            .comment("level", level)
            .comment("energy", fmt_f64(field.energy))
            .comment("coordinates", serde_json::to_value(field.coordinates).unwrap_or_default().as_str().unwrap_or(""))
            .comment("x_range", format!("{} {}", fmt_f64(x_range[0]), fmt_f64(x_range[1])))
            .comment("y_range", format!("{} {}", fmt_f64(y_range[0]), fmt_f64(y_range[1])))
            .comment("resolution", format!("{nx} {ny}"))
            .comment("integral", fmt_f64(field.integral))
            .comment("deficit", fmt_f64(field.deficit()));
        for j in 0..ny {
            for i in 0..nx {
                t.push(vec![fmt_f64(grid.x(i)), fmt_f64(grid.y(j)), fmt_f64(field.at(i, j))]);
            }
        }
        products.push((format!("density_{level}.csv"), Product::Csv(t)));
    }
    Ok(products)
}

fn classical_header(t: &mut CsvTable, config: &RunConfig) {
    describe_model(t, config);
    let c = &config.classical;
    t.comment("seed", c.seed).comment(
        "integrator",
        format!("{:?} step={}", c.integrator.composition, c.integrator.step),
    );
}

fn poincare(config: &RunConfig) -> Result<Products, CliError> {
    let c = &config.classical;
    let records = poincare_section(&config.model, c.energy, c.trajectories, c.crossings, c.max_duration, c.seed, &c.integrator)
        .context(|| format!("Poincaré section at E = {}", c.energy))?;
    let mut t = CsvTable::new(&["traj_id", "x", "px"]);
    classical_header(&mut t, config);
    t.comment("energy", fmt_f64(c.energy));
    for (id, r) in records.iter().enumerate() {
        for x in &r.crossings {
            t.push(vec![id.to_string(), fmt_f64(x.x), fmt_f64(x.px)]);
        }
    }
    Ok(vec![("section.csv".into(), Product::Csv(t))])
}

fn l2map(config: &RunConfig) -> Result<Products, CliError> {
    let c = &config.classical;
    let mesh = Mesh::covering(&config.model, c.energy, c.mesh[0], c.mesh[1]).context(|| "section mesh".into())?;
    let map = l2_section_map(&config.model, c.energy, &mesh, &c.l2, &c.integrator)
        .context(|| format!("L2 map at E = {}", c.energy))?;
    let mut t = CsvTable::new(&["x", "px", "value", "mask"]);
    classical_header(&mut t, config);
    t.comment("energy", fmt_f64(c.energy))
        .comment("mesh", format!("{} {}", mesh.nx, mesh.npx))
        .comment("masked_fraction", fmt_f64(map.masked_fraction()))
        .comment("converged_cells", map.converged.iter().filter(|c| **c).count());
    for j in 0..mesh.npx {
        for i in 0..mesh.nx {
            let k = j * mesh.nx + i;
            t.push(vec![fmt_f64(mesh.x(i)), fmt_f64(mesh.px(j)), fmt_f64(map.values[k]), flag(!map.accessible[k])]);
        }
    }
    let mut products = vec![("l2map.csv".to_string(), Product::Csv(t))];
    if c.binary_map {
        let bytes: Vec<u8> = map.values.iter().flat_map(|v| v.to_le_bytes()).collect();
        let sidecar = serde_json::json!({
            "format_version": config.output.format_version,
            "data": "l2map.bin",
            "dtype": "f64-le",
            "shape": [mesh.npx, mesh.nx],
            "order": "row-major, px outer",
            "x_range": mesh.x_range,
            "px_range": mesh.px_range,
            "energy": c.energy,
            "masked": "NaN",
        });
        products.push(("l2map.bin".into(), Product::Bytes(bytes)));
        products.push(("l2map.json".into(), Product::Json(sidecar)));
    }
    Ok(products)
}

fn regular_fraction(config: &RunConfig) -> Result<Products, CliError> {
    let c = &config.classical;
    let energies = if c.energies.is_empty() { vec![c.energy] } else { c.energies.clone() };
    let mut t = CsvTable::new(&["E", "f_reg", "stderr", "n"]);
    classical_header(&mut t, config);
    for e in energies {
        let f = freg(&config.model, e, c.samples, c.seed, &c.sali, &c.integrator).context(|| format!("f_reg at E = {e}"))?;
        t.push(vec![fmt_f64(e), fmt_f64(f.value), fmt_f64(f.stderr), f.n.to_string()]);
    }
    Ok(vec![("freg.csv".into(), Product::Csv(t))])
}

fn bounds(config: &RunConfig) -> Result<Products, CliError> {
    let c = &config.classical;
    let bs = if c.b_values.is_empty() { vec![config.model.b] } else { c.b_values.clone() };
    let params: Vec<_> = bs.iter().map(|&b| crate::ModelParams { b, ..config.model }).collect();
    let rows = l2_bounds(&params, c.energy, c.samples, c.seed, &c.l2, &c.integrator)
        .context(|| format!("L2 bounds at E = {}", c.energy))?;
    let mut t = CsvTable::new(&["B", "l2_min", "l2_max", "n_converged_samples"]);
    classical_header(&mut t, config);
    t.comment("energy", fmt_f64(c.energy)).comment("samples", c.samples);
    for r in rows {
        t.push(vec![fmt_f64(r.b), fmt_f64(r.l2_min), fmt_f64(r.l2_max), r.n_converged.to_string()]);
    }
    Ok(vec![("bounds.csv".into(), Product::Csv(t))])
}

fn brody(config: &RunConfig) -> Result<Products, CliError> {
    let length = config.length().context(|| "oscillator length".into())?;
    let (energies, n_converged) =
        spectra::solve_energies(&config.model, config.quantization, config.basis.n_max, length).context(|| "spectrum".into())?;
    let [lo, hi] = config.brody.window;
    let converged = &energies[..n_converged];
    let sample = stats::unfold(converged, (lo, hi), config.brody.degree).context(|| format!("unfolding in [{lo}, {hi}]"))?;
    let fit = stats::brody_fit(&sample).context(|| format!("Brody fit in [{lo}, {hi}]"))?;
    let mut t = CsvTable::new(&["window_lo", "window_hi", "omega", "omega_raw", "ci_lo", "ci_hi", "n"]);
    describe_model(&mut t, config);
    t.comment("quantization", config.quantization)
        .comment("n_max", config.basis.n_max)
        .comment("n_converged", n_converged)
        .comment("top_converged_energy", converged.last().map_or("none".into(), |e| fmt_f64(*e)));
    t.push(vec![
        fmt_f64(lo),
        fmt_f64(hi),
        fmt_f64(fit.omega),
        fmt_f64(fit.omega_raw),
        fmt_f64(fit.ci_lo),
        fmt_f64(fit.ci_hi),
        fit.n.to_string(),
    ]);
    Ok(vec![("brody.csv".into(), Product::Csv(t))])
}
