// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use acam::array::{search, sweep_column, ArraySpec, SweepPoint, Variant};
use acam::cell::{calibrate_from, reference_anchors, Anchor, CellConfig};
use acam::compiler::{
    build_array, parse_rules, search_table, CamTable, TableKind, MAX_KEY_BITS,
};
use acam::config::Config;
use acam::cost::{baseline_comparison, compare_range_implementations, energy_per_search};
use acam::device::DeviceParams;
use acam::tree::{tree_to_cam, DecisionTree};
use acam::AcamError;
use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "acam", version, about = "Analog CAM simulator and table compiler")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Config file with device/energy/area sections.
    #[arg(long, global = true, env = "ACAM_CONFIG")]
    config: Option<PathBuf>,
    /// Program every memristor by seeded write-verify before searching,
    /// instead of using exact target conductances.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write-verify tolerance in uS for `--seed`.
    #[arg(long, global = true, default_value_t = 1.0)]
    tol: f64,
    /// Directory for output files; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Match-line device.
    #[arg(long, global = true, value_enum, default_value_t = VariantArg::Mosfet)]
    variant: VariantArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Mosfet,
    Ts,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Mosfet => Variant::TransistorPulldown,
            VariantArg::Ts => Variant::TsPullup,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit device parameters to measured (conductance, interval) anchors.
    Calibrate {
        /// JSON list of anchors; the two reference anchors when absent.
        anchors: Option<PathBuf>,
    },
    /// Compile range rules (JSON lines) or a decision tree (JSON) to a table.
    Compile {
        input: PathBuf,
        /// Bits stored per analog cell.
        #[arg(long, conflicts_with = "ternary")]
        bits: Option<u32>,
        /// Emit a ternary (TCAM) table.
        #[arg(long)]
        ternary: bool,
    },
    /// Sweep one data line and record every row's sensed match-line voltage.
    Sweep {
        /// Table or array JSON; omit to use --cell/--cols.
        input: Option<PathBuf>,
        /// Column to sweep.
        #[arg(long, default_value_t = 0)]
        column: usize,
        /// Sweep step in mV.
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        /// Voltage on every other data line.
        #[arg(long, default_value_t = 0.4)]
        bias: f64,
        /// Uniform one-row array cell as "G_M1,G_M2" in uS.
        #[arg(long)]
        cell: Option<String>,
        /// Columns of the uniform array.
        #[arg(long, default_value_t = 1)]
        cols: usize,
    },
    /// Search a table (key or feature values) or an array (DL voltages).
    Search {
        input: PathBuf,
        /// Comma-separated search values.
        #[arg(long, allow_hyphen_values = true)]
        query: String,
    },
    /// Classify CSV feature rows with a compiled tree table or a tree.
    Classify { table: PathBuf, inputs: PathBuf },
    /// Energy, area and device-count report.
    Cost {
        /// Compiled table; omit to use --rows/--cols.
        table: Option<PathBuf>,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        /// Drop the DAC line (analog inputs).
        #[arg(long)]
        no_dac: bool,
        /// Emit JSON instead of aligned text.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 3 parse, 4 domain, 5 convergence, 1 anything else (2 is clap usage).
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<AcamError>() {
        Some(AcamError::Parse { .. }) => 3,
        Some(AcamError::CalibrationFailure { .. } | AcamError::ProgrammingFailure { .. }) => 5,
        Some(_) => 4,
        None => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let g = cli.global;
    let config = match &g.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let out = Output::new(g.out.clone())?;
    match cli.cmd {
        Cmd::Calibrate { anchors } => cmd_calibrate(anchors.as_deref(), &config, &out),
        Cmd::Compile {
            input,
            bits,
            ternary,
        } => cmd_compile(&input, bits, ternary, &config, &out),
        Cmd::Sweep {
            input,
            column,
            step,
            bias,
            cell,
            cols,
        } => {
            let a = match (input, cell) {
                (Some(path), None) => load_array(&path, &config.device)?,
                (None, Some(cell)) => uniform_array(&cell, cols)?,
                _ => bail!("give either an input file or --cell"),
            };
            let a = prepare(a, &g, &config.device)?;
            cmd_sweep(&a, column, step, bias, &config.device, &out)
        }
        Cmd::Search { input, query } => {
            let values = parse_values(&query)?;
            cmd_search(&input, &values, &g, &config.device, &out)
        }
        Cmd::Classify { table, inputs } => cmd_classify(&table, &inputs, &g, &config.device, &out),
        Cmd::Cost {
            table,
            rows,
            cols,
            no_dac,
            json,
        } => cmd_cost(table.as_deref(), rows, cols, no_dac, json, &config, &out),
    }
}

/// Writes to files under `--out`, or to stdout.
struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    fn new(dir: Option<PathBuf>) -> anyhow::Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        }
        Ok(Output { dir })
    }

    /// Primary product: a file under `--out`, stdout otherwise.
    fn emit(&self, name: &str, body: &str) -> anyhow::Result<()> {
        match &self.dir {
            Some(d) => {
                let path = d.join(name);
                fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
            }
            None => {
                std::io::stdout().write_all(body.as_bytes())?;
                Ok(())
            }
        }
    }

    /// Secondary file only written under `--out`.
    fn side_file(&self, name: &str, body: &str) -> anyhow::Result<()> {
        if let Some(d) = &self.dir {
            let path = d.join(name);
            fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn parse_json(text: &str) -> anyhow::Result<Value> {
    Ok(serde_json::from_str(text).map_err(AcamError::from)?)
}

fn cmd_calibrate(anchors: Option<&Path>, config: &Config, out: &Output) -> anyhow::Result<()> {
    let anchors: Vec<Anchor> = match anchors {
        Some(path) => serde_json::from_str(&read(path)?).map_err(AcamError::from)?,
        None => reference_anchors(),
    };
    let base = DeviceParams {
        v_th: DeviceParams::uncalibrated().v_th,
        v_th_ml: DeviceParams::uncalibrated().v_th_ml,
        v_th_inv: DeviceParams::uncalibrated().v_th_inv,
        beta: DeviceParams::uncalibrated().beta,
        ..config.device
    };
    let cal = calibrate_from(&base, &anchors)?;
    let fitted = Config {
        device: cal.params,
        ..*config
    };
    out.emit("calibration.json", &(serde_json::to_string_pretty(&cal)? + "\n"))?;
    out.side_file("config.json", &(fitted.to_json()? + "\n"))?;
    for r in &cal.residuals {
        eprintln!(
            "anchor ({:.0}, {:.0}) uS: fit [{:.4}, {:.4}] V, target [{:.4}, {:.4}] V",
            r.anchor.g_m1_uS, r.anchor.g_m2_uS, r.lo_fit_V, r.hi_fit_V, r.anchor.lo_V, r.anchor.hi_V
        );
    }
    eprintln!("worst residual {:.2} mV", cal.max_residual_V * 1e3);
    Ok(())
}

fn cmd_compile(
    input: &Path,
    bits: Option<u32>,
    ternary: bool,
    config: &Config,
    out: &Output,
) -> anyhow::Result<()> {
    let text = read(input)?;
    let table = if let Some(tree) = as_tree(&text)? {
        if bits.is_some() || ternary {
            bail!(AcamError::Domain(
                "decision trees compile to continuous-interval tables; drop --bits/--ternary".into()
            ));
        }
        tree_to_cam(&tree, &config.device)?
    } else {
        let rules = parse_rules(&text)?;
        if rules.is_empty() {
            empty_table(bits, ternary)
        } else if ternary {
            CamTable::ternary(&rules)?
        } else {
            let Some(k) = bits else {
                bail!(AcamError::Domain("range rules need --bits K or --ternary".into()));
            };
            CamTable::digits(&rules, k)?
        }
    };
    out.side_file("table.txt", &table.to_grid())?;
    match &out.dir {
        Some(_) => out.emit("table.json", &(table.to_json()? + "\n"))?,
        None => out.emit("table.txt", &table.to_grid())?,
    }
    eprintln!("{} rows x {} cells", table.n_rows(), table.width());
    Ok(())
}

fn empty_table(bits: Option<u32>, ternary: bool) -> CamTable {
    CamTable {
        kind: if ternary { TableKind::Ternary } else { TableKind::Digit },
        key_bits: None,
        bits_per_cell: if ternary { Some(1) } else { bits },
        level_family: None,
        encodings: Vec::new(),
        rows: Vec::new(),
        labels: Default::default(),
        rules: Vec::new(),
    }
}

fn as_tree(text: &str) -> anyhow::Result<Option<DecisionTree>> {
    match serde_json::from_str::<Value>(text) {
        Ok(v) if v.get("root").is_some() => Ok(Some(DecisionTree::from_json(text)?)),
        _ => Ok(None),
    }
}

/// Table, tree or array JSON, as an array plus the table it came from.
fn load_any(path: &Path, p: &DeviceParams) -> anyhow::Result<(ArraySpec, Option<CamTable>)> {
    let text = read(path)?;
    let v = parse_json(&text)?;
    if v.get("root").is_some() {
        let table = tree_to_cam(&DecisionTree::from_json(&text)?, p)?;
        Ok((build_array(&table, p)?, Some(table)))
    } else if v.get("kind").is_some() {
        let table = CamTable::from_json(&text)?;
        Ok((build_array(&table, p)?, Some(table)))
    } else {
        let a: ArraySpec = serde_json::from_value(v).map_err(AcamError::from)?;
        a.validate()?;
        Ok((a, None))
    }
}

fn load_array(path: &Path, p: &DeviceParams) -> anyhow::Result<ArraySpec> {
    Ok(load_any(path, p)?.0)
}

fn uniform_array(cell: &str, cols: usize) -> anyhow::Result<ArraySpec> {
    let g = parse_values(cell)?;
    let [g1, g2] = g.as_slice() else {
        bail!(AcamError::Domain("--cell takes \"G_M1,G_M2\" in uS".into()));
    };
    if cols == 0 {
        bail!(AcamError::Domain("--cols must be at least 1".into()));
    }
    Ok(ArraySpec::uniform(1, cols, CellConfig::from_micro(*g1, *g2))?)
}

fn parse_values(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| AcamError::Parse {
                    line: None,
                    msg: format!("not a number: {t:?}"),
                })
                .map_err(anyhow::Error::from)
        })
        .collect()
}

/// Apply `--variant` and, with `--seed`, seeded write-verify programming.
fn prepare(a: ArraySpec, g: &Global, p: &DeviceParams) -> anyhow::Result<ArraySpec> {
    let a = a.with_variant(g.variant.into());
    Ok(match g.seed {
        Some(seed) => a.programmed(seed, g.tol * 1e-6, p)?,
        None => a,
    })
}

fn cmd_sweep(
    a: &ArraySpec,
    column: usize,
    step_mv: f64,
    bias: f64,
    p: &DeviceParams,
    out: &Output,
) -> anyhow::Result<()> {
    let stimulus = vec![bias; a.cols];
    let points = sweep_column(a, column, &stimulus, step_mv * 1e-3, p)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for pt in &points {
        w.serialize(pt)?;
    }
    let body = String::from_utf8(w.into_inner()?)?;
    out.emit("sweep.csv", &body)?;
    for row in 0..a.rows {
        let matched: Vec<&SweepPoint> = points.iter().filter(|s| s.row == row && s.matched).collect();
        match (matched.first(), matched.last()) {
            (Some(f), Some(l)) => eprintln!("row {row}: match band [{:.4}, {:.4}] V", f.v_dl, l.v_dl),
            _ => eprintln!(
                "warning: row {row}: empty match band (a {step_mv} mV step may be coarser than the band)"
            ),
        }
    }
    Ok(())
}

fn cmd_search(
    input: &Path,
    values: &[f64],
    g: &Global,
    p: &DeviceParams,
    out: &Output,
) -> anyhow::Result<()> {
    let (a, table) = load_any(input, p)?;
    let a = prepare(a, g, p)?;
    let stimulus = match &table {
        Some(t) => t.encode_input(values)?,
        None => values.to_vec(),
    };
    let result = search(&a, &stimulus, p)?;
    let mut doc = serde_json::json!({ "stimulus": stimulus, "result": result });
    if let Some(t) = &table {
        let labels: Vec<&str> = result
            .matched_rows()
            .into_iter()
            .filter_map(|r| t.label(r))
            .collect();
        doc["labels"] = serde_json::json!(labels);
    }
    out.emit("search.json", &(serde_json::to_string_pretty(&doc)? + "\n"))
}

fn cmd_classify(
    table: &Path,
    inputs: &Path,
    g: &Global,
    p: &DeviceParams,
    out: &Output,
) -> anyhow::Result<()> {
    let (a, table) = load_any(table, p)?;
    let Some(table) = table else {
        bail!(AcamError::Domain("classify needs a compiled table or a tree".into()));
    };
    let a = prepare(a, g, p)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(inputs)
        .with_context(|| format!("reading {}", inputs.display()))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut wrote_header = false;
    let mut n = 0usize;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| AcamError::Parse {
            line: Some(i + 1),
            msg: e.to_string(),
        })?;
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        if i == 0 && parsed.is_err() {
            continue;
        }
        if !wrote_header {
            w.write_record(["input", "label"])?;
            wrote_header = true;
        }
        let label = match parsed {
            Err(e) => format!("error: {e}"),
            Ok(x) => match search_table(&table, &a, &x, p) {
                Err(e) => format!("error: {e}"),
                Ok(rows) => match rows.as_slice() {
                    [r] => table.label(*r).unwrap_or_default().to_string(),
                    _ => format!("error: {}", AcamError::Ambiguous { matches: rows.len() }),
                },
            },
        };
        w.write_record([n.to_string(), label])?;
        n += 1;
    }
    out.emit("labels.csv", &String::from_utf8(w.into_inner()?)?)
}

fn cmd_cost(
    table: Option<&Path>,
    rows: Option<usize>,
    cols: Option<usize>,
    no_dac: bool,
    json: bool,
    config: &Config,
    out: &Output,
) -> anyhow::Result<()> {
    let ep = if no_dac { config.energy.without_dac() } else { config.energy };
    let ap = config.area;
    let table = table.map(|p| -> anyhow::Result<CamTable> { Ok(CamTable::from_json(&read(p)?)?) });
    let table = table.transpose()?;
    let (r, c) = match (&table, rows, cols) {
        (Some(t), None, None) => (t.n_rows(), t.width()),
        (None, Some(r), Some(c)) => (r, c),
        _ => bail!(AcamError::Domain("give a table or both --rows and --cols".into())),
    };
    let mut report = energy_per_search(r, c, &ep, &ap)?;
    let mut comparisons = Vec::new();
    if let Some(t) = &table {
        let tcam_cells: usize = t
            .rules
            .iter()
            .map(|rule| acam::compiler::range_to_ternary(rule).len() * rule.width_bits as usize)
            .sum();
        if tcam_cells > 0 && t.kind != TableKind::Ternary {
            report = report.with_tcam_equivalent(tcam_cells);
        }
        if t.kind != TableKind::Analog {
            for rule in &t.rules {
                let mut options: Vec<u32> = vec![3, 4, 8];
                if let Some(k) = t.bits_per_cell.filter(|k| !options.contains(k) && *k > 1) {
                    options.push(k);
                }
                options.retain(|k| *k <= rule.width_bits.min(MAX_KEY_BITS));
                comparisons.push(compare_range_implementations(rule, &options, &ap, &ep)?);
            }
        }
    }
    let baselines = baseline_comparison(&report);
    let body = if json {
        serde_json::to_string_pretty(&serde_json::json!({
            "energy": ep,
            "report": report,
            "baselines": baselines,
            "ranges": comparisons,
        }))? + "\n"
    } else {
        let mut s = report.to_text();
        s.push('\n');
        s.push_str(&baselines.to_text());
        for cmp in &comparisons {
            s.push('\n');
            s.push_str(&cmp.to_text());
        }
        s
    };
    out.emit(if json { "cost.json" } else { "cost.txt" }, &body)
}
