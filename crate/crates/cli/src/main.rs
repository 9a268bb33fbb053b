use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sdrns_core::cost::{
    classify, compare_systems, select_system, total_energy, ConversionMode, CostTable, DesignPoint,
    System, Thresholds, WorkloadCounts,
};
use sdrns_core::exec::Execution;
use sdrns_core::numeral::{Channel, ModuliSet, SdVector};
use sdrns_core::rns::{forward_convert, reverse_convert, rns_add, rns_mul};
use sdrns_core::sd::{sd_add, sd_mul};
use sdrns_core::sdrns::{decode, encode, sdrns_add, sdrns_mul, ChannelKind};
use sdrns_core::sweep::{write_csv, AxisRange, SweepGrid};
use sdrns_core::verify::{self, VerifyMode};
use sdrns_core::workload::{layer_counts, preset, WorkloadFile};
use sdrns_core::Error;

#[derive(Parser)]
#[command(
    name = "sdrns",
    version,
    about = "Binary, residue, signed-digit and signed-digit residue arithmetic with a delay model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a value to residues and signed-digit channels and back.
    Convert {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        value: u128,
    },
    /// Add or multiply two values in one number system.
    Calc {
        #[arg(long, default_value_t = 5)]
        n: u32,
        #[arg(long, value_enum, default_value_t = SystemArg::SdRns)]
        system: SystemArg,
        #[arg(value_enum)]
        op: OpArg,
        a: u128,
        b: u128,
    },
    /// Estimate total delay of a workload on every number system.
    Estimate(EstimateArgs),
    /// Emit a delay surface over a grid of addition and multiplication counts.
    Sweep(SweepArgs),
    /// Recommend a number system from addition and multiplication counts.
    Select(SelectArgs),
    /// Run the arithmetic self-checks.
    Verify(VerifyArgs),
    /// Print the per-layer operation counts of a network.
    Layers {
        #[arg(
            long,
            conflicts_with = "workload",
            required_unless_present = "workload"
        )]
        preset: Option<String>,
        #[arg(long)]
        workload: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    Bns,
    Rns,
    Sd,
    SdRns,
}

impl From<SystemArg> for System {
    fn from(s: SystemArg) -> Self {
        match s {
            SystemArg::Bns => System::Bns,
            SystemArg::Rns => System::Rns,
            SystemArg::Sd => System::Sd,
            SystemArg::SdRns => System::SdRns,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    Add,
    Mul,
}

#[derive(Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Table,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConversionArg {
    Zero,
    #[value(alias = "table")]
    FromTable,
}

impl From<ConversionArg> for ConversionMode {
    fn from(c: ConversionArg) -> Self {
        match c {
            ConversionArg::Zero => ConversionMode::Zero,
            ConversionArg::FromTable => ConversionMode::FromTable,
        }
    }
}

#[derive(Args)]
struct PointArgs {
    /// Precision in bits.
    #[arg(long = "p", default_value_t = 16)]
    precision: u32,
    /// Channel size.
    #[arg(long, default_value_t = 5)]
    n: u32,
    /// Cost-table file; defaults to the built-in synthesis delays.
    #[arg(long)]
    cost_table: Option<PathBuf>,
}

impl PointArgs {
    fn point(&self) -> DesignPoint {
        DesignPoint::new(self.precision, self.n)
    }

    fn table(&self) -> Result<CostTable, CliError> {
        match &self.cost_table {
            Some(path) => CostTable::from_json(&read(path)?).map_err(|e| CliError::file(path, e)),
            None => Ok(CostTable::reference()),
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long, conflicts_with_all = ["adds", "muls", "preset"])]
    workload: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["adds", "muls"])]
    preset: Option<String>,
    #[arg(long, default_value_t = 0)]
    adds: u64,
    #[arg(long, default_value_t = 0)]
    muls: u64,
    #[command(flatten)]
    point: PointArgs,
    /// Only print this system's row.
    #[arg(long, value_enum)]
    system: Option<SystemArg>,
    #[arg(long, value_enum, default_value_t = ConversionArg::FromTable)]
    conversion: ConversionArg,
    /// Also report energy; requires energy figures in the cost table.
    #[arg(long)]
    energy: bool,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 0)]
    x_start: u64,
    #[arg(long, default_value_t = 1000)]
    x_stop: u64,
    #[arg(long, default_value_t = 100)]
    x_step: u64,
    #[arg(long, default_value_t = 0)]
    y_start: u64,
    #[arg(long, default_value_t = 1000)]
    y_stop: u64,
    #[arg(long, default_value_t = 100)]
    y_step: u64,
    #[command(flatten)]
    point: PointArgs,
    /// Systems to include (default: all).
    #[arg(long, value_enum, value_delimiter = ',')]
    systems: Vec<SystemArg>,
    #[arg(long, value_enum, default_value_t = ConversionArg::Zero)]
    conversion: ConversionArg,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    adds: u64,
    #[arg(long)]
    muls: u64,
    #[arg(long, default_value_t = 10)]
    low_max: u64,
    #[arg(long, default_value_t = 100)]
    med_max: u64,
    /// Precision for the quantitative cross-check; requires --n.
    #[arg(long = "p", requires = "n")]
    precision: Option<u32>,
    #[arg(long, requires = "precision")]
    n: Option<u32>,
    #[arg(long)]
    cost_table: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    exhaustive: bool,
    /// Number of random trials per suite.
    #[arg(long)]
    random: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Disable data-parallel execution.
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn file(path: &Path, e: Error) -> Self {
        CliError::usage(format!("{}: {e}", path.display()))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let result = match cli.command {
        Command::Convert { n, value } => cmd_convert(&mut out, n, value),
        Command::Calc {
            n,
            system,
            op,
            a,
            b,
        } => cmd_calc(&mut out, n, system.into(), op, a, b),
        Command::Estimate(args) => cmd_estimate(&mut out, &args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Select(args) => cmd_select(&mut out, &args),
        Command::Verify(args) => cmd_verify(&mut out, &args),
        Command::Layers { preset, workload } => cmd_layers(&mut out, preset, workload),
    };
    let mut stdout = io::stdout().lock();
    // a closed pipe is not worth reporting
    let _ = stdout.write_all(out.as_bytes());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn cmd_convert(out: &mut String, n: u32, value: u128) -> Result<(), CliError> {
    let ms = ModuliSet::new(n)?;
    let r = forward_convert(value, &ms)?;
    let t = encode(value, &ms)?;
    let [m1, m2, m3] = ms.moduli();
    writeln!(out, "moduli: {{{m1}, {m2}, {m3}}}  M = {}", ms.range()).unwrap();
    writeln!(out, "value: {value}").unwrap();
    writeln!(out, "residues: {r}").unwrap();
    writeln!(out, "sd channels (MSB first):").unwrap();
    for ch in Channel::ALL {
        let kind = ChannelKind::for_channel(&ms, ch);
        let label = kind.to_string();
        writeln!(out, "  {label:<9} {}", t.channel(ch)).unwrap();
    }
    writeln!(out, "rns decode: {}", reverse_convert(&r)).unwrap();
    writeln!(out, "sd-rns decode: {}", decode(&t)).unwrap();
    Ok(())
}

fn bit_width(v: u128) -> usize {
    (128 - v.leading_zeros() as usize).max(1)
}

fn cmd_calc(
    out: &mut String,
    n: u32,
    system: System,
    op: OpArg,
    a: u128,
    b: u128,
) -> Result<(), CliError> {
    let sym = match op {
        OpArg::Add => "+",
        OpArg::Mul => "*",
    };
    match system {
        System::Bns => {
            let r = match op {
                OpArg::Add => a.checked_add(b),
                OpArg::Mul => a.checked_mul(b),
            }
            .ok_or_else(|| CliError::usage("result overflows 128 bits"))?;
            writeln!(out, "{a} {sym} {b} = {r}").unwrap();
            writeln!(out, "binary: {r:b}").unwrap();
        }
        System::Sd => {
            let w = bit_width(a).max(bit_width(b));
            let to_sd = |v: u128| -> Result<SdVector, CliError> {
                let v =
                    i128::try_from(v).map_err(|_| CliError::usage("operand exceeds 127 bits"))?;
                Ok(SdVector::from_int(v, w)?)
            };
            let (sa, sb) = (to_sd(a)?, to_sd(b)?);
            let r = match op {
                OpArg::Add => sd_add(&sa, &sb)?,
                OpArg::Mul => sd_mul(&sa, &sb)?,
            };
            writeln!(out, "{sa} {sym} {sb}").unwrap();
            writeln!(out, "= {r}").unwrap();
            writeln!(out, "value: {}", r.value()).unwrap();
        }
        System::Rns => {
            let ms = ModuliSet::new(n)?;
            let (ra, rb) = (forward_convert(a, &ms)?, forward_convert(b, &ms)?);
            let r = match op {
                OpArg::Add => rns_add(&ra, &rb)?,
                OpArg::Mul => rns_mul(&ra, &rb)?,
            };
            writeln!(out, "{ra} {sym} {rb} = {r}").unwrap();
            writeln!(out, "value: {} (mod {})", reverse_convert(&r), ms.range()).unwrap();
        }
        System::SdRns => {
            let ms = ModuliSet::new(n)?;
            let (ta, tb) = (encode(a, &ms)?, encode(b, &ms)?);
            let r = match op {
                OpArg::Add => sdrns_add(&ta, &tb)?,
                OpArg::Mul => sdrns_mul(&ta, &tb)?,
            };
            for ch in Channel::ALL {
                let label = ChannelKind::for_channel(&ms, ch).to_string();
                writeln!(
                    out,
                    "  {label:<9} {} {sym} {} = {}",
                    ta.channel(ch),
                    tb.channel(ch),
                    r.channel(ch)
                )
                .unwrap();
            }
            writeln!(out, "residues: {}", r.canonical()).unwrap();
            writeln!(out, "value: {} (mod {})", decode(&r), ms.range()).unwrap();
        }
    }
    Ok(())
}

fn cmd_estimate(out: &mut String, args: &EstimateArgs) -> Result<(), CliError> {
    let w = if let Some(path) = &args.workload {
        let text = read(path)?;
        WorkloadFile::from_json(&text)
            .and_then(|f| f.counts())
            .map_err(|e| CliError::file(path, e))?
    } else if let Some(name) = &args.preset {
        sdrns_core::workload::network_counts(&preset(name)?)?
    } else {
        WorkloadCounts::new(args.adds, args.muls)
    };
    let table = args.point.table()?;
    let pt = args.point.point();
    let ranked = compare_systems(w, pt, &table, args.conversion.into())?;
    let only = args.system.map(System::from);

    let energies = if args.energy {
        ranked
            .iter()
            .map(|e| {
                let c = table.costs(pt, e.system)?;
                total_energy(w, e.system, c)
            })
            .collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };
    let unit = table.energy_unit().unwrap_or("");

    match args.format {
        Format::Csv => {
            out.push_str("system,delay_ns,rank,conversion_defaulted");
            if args.energy {
                out.push_str(",energy");
            }
            out.push('\n');
            for (i, e) in ranked.iter().enumerate() {
                if only.is_some_and(|s| s != e.system) {
                    continue;
                }
                write!(
                    out,
                    "{},{:.6},{},{}",
                    e.system.key(),
                    e.total_ns,
                    i + 1,
                    e.conversion_defaulted
                )
                .unwrap();
                if let Some(en) = energies.get(i) {
                    write!(out, ",{en}").unwrap();
                }
                out.push('\n');
            }
        }
        Format::Table => {
            writeln!(
                out,
                "workload: x = {} additions, y = {} multiplications",
                w.x, w.y
            )
            .unwrap();
            writeln!(out, "design point: {pt}").unwrap();
            write!(out, "{:<6}  {:<8}  {:>14}", "rank", "system", "delay (ns)").unwrap();
            if args.energy {
                write!(out, "  {:>14}", format!("energy ({unit})")).unwrap();
            }
            out.push('\n');
            for (i, e) in ranked.iter().enumerate() {
                if only.is_some_and(|s| s != e.system) {
                    continue;
                }
                write!(
                    out,
                    "{:<6}  {:<8}  {:>14.4}",
                    i + 1,
                    e.system.to_string(),
                    e.total_ns
                )
                .unwrap();
                if let Some(en) = energies.get(i) {
                    write!(out, "  {en:>14.4}").unwrap();
                }
                out.push('\n');
            }
            let defaulted: Vec<String> = ranked
                .iter()
                .filter(|e| e.conversion_defaulted && only.is_none_or(|s| s == e.system))
                .map(|e| e.system.to_string())
                .collect();
            if !defaulted.is_empty() {
                writeln!(
                    out,
                    "warning: no conversion delays for {} in the cost table; counted as 0 ns",
                    defaulted.join(", ")
                )
                .unwrap();
            }
        }
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let grid = SweepGrid {
        x: AxisRange::new(args.x_start, args.x_stop, args.x_step)?,
        y: AxisRange::new(args.y_start, args.y_stop, args.y_step)?,
        point: args.point.point(),
        systems: if args.systems.is_empty() {
            System::ALL.to_vec()
        } else {
            args.systems.iter().map(|&s| s.into()).collect()
        },
        mode: args.conversion.into(),
    };
    let rows = grid.evaluate(&args.point.table()?, Execution::default())?;
    let stdout = io::stdout().lock();
    let mut buf = io::BufWriter::new(stdout);
    write_csv(&rows, &mut buf)?;
    buf.flush()?;
    Ok(())
}

fn cmd_select(out: &mut String, args: &SelectArgs) -> Result<(), CliError> {
    let t = Thresholds::new(args.low_max, args.med_max)?;
    let (ca, cm) = (classify(args.adds, t), classify(args.muls, t));
    writeln!(out, "additions:       {} ({ca})", args.adds).unwrap();
    writeln!(out, "multiplications: {} ({cm})", args.muls).unwrap();
    let rec = select_system(ca, cm);
    if rec.is_empty() {
        writeln!(out, "recommendation: none").unwrap();
    } else {
        let names: Vec<String> = rec.iter().map(|s| s.to_string()).collect();
        writeln!(out, "recommendation: {}", names.join(" / ")).unwrap();
    }
    if let (Some(p), Some(n)) = (args.precision, args.n) {
        let table = match &args.cost_table {
            Some(path) => {
                CostTable::from_json(&read(path)?).map_err(|e| CliError::file(path, e))?
            }
            None => CostTable::reference(),
        };
        let pt = DesignPoint::new(p, n);
        let ranked = compare_systems(
            WorkloadCounts::new(args.adds, args.muls),
            pt,
            &table,
            ConversionMode::FromTable,
        )?;
        let best = &ranked[0];
        writeln!(
            out,
            "model argmin at {pt}: {} ({:.4} ns)",
            best.system, best.total_ns
        )
        .unwrap();
    }
    Ok(())
}

fn cmd_verify(out: &mut String, args: &VerifyArgs) -> Result<(), CliError> {
    let mode = match args.random {
        Some(trials) => VerifyMode::Random {
            trials,
            seed: args.seed,
        },
        None => VerifyMode::Exhaustive,
    };
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let report = verify::run(args.n, mode, exec)?;
    writeln!(out, "{report}").unwrap();
    if report.passed() {
        Ok(())
    } else {
        Err(CliError {
            code: 1,
            message: "verification failed".into(),
        })
    }
}

fn cmd_layers(
    out: &mut String,
    name: Option<String>,
    workload: Option<PathBuf>,
) -> Result<(), CliError> {
    let net = match (name, workload) {
        (Some(name), _) => preset(&name)?,
        (None, Some(path)) => {
            match WorkloadFile::from_json(&read(&path)?).map_err(|e| CliError::file(&path, e))? {
                WorkloadFile::Network(net) => net,
                WorkloadFile::Counts(_) => {
                    return Err(CliError::usage(format!(
                        "{}: holds raw counts, not layers",
                        path.display()
                    )))
                }
            }
        }
        (None, None) => return Err(CliError::usage("give --preset or --workload")),
    };
    net.validate()?;
    writeln!(out, "{}", net.name).unwrap();
    writeln!(out, "{:<5}  {:<34}  {:>14}", "layer", "spec", "MACs").unwrap();
    let mut total = WorkloadCounts::default();
    for (i, layer) in net.layers.iter().enumerate() {
        let c = layer_counts(layer)?;
        total = total + c;
        let desc = match *layer {
            sdrns_core::workload::LayerSpec::Conv {
                h_in,
                w_in,
                c_in,
                c_out,
                kernel,
                stride,
                padding,
            } => {
                format!("conv {h_in}x{w_in}x{c_in} -> {c_out}, k{kernel} s{stride} p{padding}")
            }
            sdrns_core::workload::LayerSpec::Fc { d_in, d_out } => format!("fc {d_in} -> {d_out}"),
            sdrns_core::workload::LayerSpec::Pool {
                h_in,
                w_in,
                c,
                size,
                stride,
            } => {
                format!("pool {h_in}x{w_in}x{c}, {size}x{size} s{stride}")
            }
        };
        writeln!(out, "{i:<5}  {desc:<34}  {:>14}", c.y).unwrap();
    }
    writeln!(out, "total: x = {}, y = {}", total.x, total.y).unwrap();
    Ok(())
}
