use clap::{ArgAction, Args, Parser, Subcommand};
use molgeom::error::{Error, IoError};
use molgeom::geometry::MolecularGeometry;
use molgeom::pdb_io::{cached_path, fetch_pdb, read_pdb_file, FetchOptions, ParseOptions, RadiusTable, DEFAULT_FETCH_BASE};
use molgeom::pipeline::{analyze, batch_row, benchmark_default, parse_code_list, BatchRow, BENCH_HEADER, CSV_HEADER};
use molgeom::quasitri::cache_path;
use rayon::prelude::*;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "molgeom", version, about = "Voids, channels and mass properties of molecules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct InputFlags {
    /// Probe radius in angstroms.
    #[arg(long, default_value_t = 1.4)]
    probe: f64,
    /// "bondi" or a CSV file of element,radius lines.
    #[arg(long, default_value = "bondi")]
    radius_table: String,
    #[arg(long)]
    include_hetatm: bool,
    #[arg(long)]
    include_waters: bool,
    /// Keep hydrogen atoms.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    include_h: bool,
    /// Directory for quasi-triangulation caches.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Report atoms, mass properties, voids and channels of one structure.
    Analyze {
        path: PathBuf,
        #[command(flatten)]
        input: InputFlags,
        /// Smallest gate radius for a channel; defaults to the probe.
        #[arg(long)]
        gate: Option<f64>,
        /// Write void atoms and channel spines to this file.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// One CSV row per code of a list file.
    Batch {
        list: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        input: InputFlags,
        /// Where structure files are looked up and downloaded to.
        #[arg(long, default_value = "pdb")]
        pdb_dir: PathBuf,
        #[arg(long, default_value = DEFAULT_FETCH_BASE)]
        fetch_base_url: String,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Analytic against grid void counts, volumes and times.
    Benchmark {
        paths: Vec<PathBuf>,
        #[command(flatten)]
        input: InputFlags,
        /// Add the built-in suite of arrangements with sub-cell voids.
        #[arg(long)]
        fixtures: bool,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 0.5, 0.1])]
        grid_res: Vec<f64>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Download structures by code.
    Fetch {
        codes: Vec<String>,
        #[arg(long, default_value = "pdb")]
        dest: PathBuf,
        #[arg(long, default_value = DEFAULT_FETCH_BASE)]
        fetch_base_url: String,
    },
}

fn exit_code(e: &Error) -> ExitCode {
    match e {
        Error::Io(_) => ExitCode::from(2),
        Error::Geom(_) => ExitCode::from(3),
    }
}

fn parse_options(f: &InputFlags) -> Result<ParseOptions, Error> {
    let radii = match f.radius_table.as_str() {
        "bondi" => RadiusTable::bondi(),
        path => RadiusTable::from_csv_file(Path::new(path), 1.80)?,
    };
    Ok(ParseOptions {
        include_hetatm: f.include_hetatm,
        include_waters: f.include_waters,
        include_hydrogens: f.include_h,
        radii,
        ..Default::default()
    })
}

fn geometry(path: &Path, f: &InputFlags, opts: &ParseOptions) -> Result<MolecularGeometry, Error> {
    let molecule = read_pdb_file(path, opts)?;
    Ok(match &f.cache_dir {
        Some(dir) => MolecularGeometry::preprocess_cached(molecule, &cache_path(path, dir))?,
        None => MolecularGeometry::preprocess(molecule)?,
    })
}

fn run_analyze(path: &Path, f: &InputFlags, gate: Option<f64>, dump: Option<&Path>) -> Result<(), Error> {
    let opts = parse_options(f)?;
    let geom = geometry(path, f, &opts)?;
    let gate = gate.unwrap_or(f.probe);
    print!("{}", analyze(&geom, f.probe, gate)?);
    if let Some(dump) = dump {
        let mut out = String::new();
        for (i, v) in geom.voids(molgeom::RadiusModel::lee_richards(f.probe))?.iter().enumerate() {
            let atoms: Vec<String> = v.contributing_atoms.iter().map(|a| geom.molecule.atoms[*a].serial.to_string()).collect();
            out.push_str(&format!("void {} {} {} atoms {}\n", i + 1, v.volume, v.area, atoms.join(" ")));
        }
        for (i, c) in geom.channels(f.probe, gate).iter().enumerate() {
            out.push_str(&format!("channel {} bottleneck {} length {}\n", i + 1, c.bottleneck_radius, c.length));
            for p in c.spine.iter().flat_map(|s| &s.points) {
                out.push_str(&format!("  {} {} {}\n", p.x, p.y, p.z));
            }
        }
        std::fs::write(dump, out)?;
    }
    Ok(())
}

fn run_batch(list: &Path, out: &Path, f: &InputFlags, pdb_dir: &Path, base: &str, jobs: Option<usize>) -> Result<(), Error> {
    let text = std::fs::read_to_string(list).map_err(IoError::from)?;
    let codes = parse_code_list(&text)?;
    let opts = parse_options(f)?;
    let fetch = FetchOptions { base_url: base.into(), ..Default::default() };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| IoError::Precondition(e.to_string()))?;
    let rows: Vec<Result<BatchRow, Error>> = pool.install(|| {
        codes
            .par_iter()
            .map(|code| {
                let local = cached_path(code, pdb_dir);
                let path = if local.is_file() { local } else { fetch_pdb(code, pdb_dir, &fetch)? };
                let molecule = read_pdb_file(&path, &opts)?;
                let cache = f.cache_dir.as_ref().map(|d| cache_path(&path, d));
                batch_row(code, molecule, f.probe, cache.as_deref())
            })
            .collect()
    });
    let mut csv = format!("{CSV_HEADER}\n");
    for (code, row) in codes.iter().zip(rows) {
        match row {
            Ok(r) => csv.push_str(&format!("{}\n", r.csv())),
            Err(e) => eprintln!("{code}: skipped: {e}"),
        }
    }
    std::fs::write(out, csv)?;
    Ok(())
}

fn run_benchmark(paths: &[PathBuf], f: &InputFlags, fixtures: bool, res: &[f64], out: Option<&Path>) -> Result<(), Error> {
    let opts = parse_options(f)?;
    let mut inputs = Vec::new();
    for p in paths {
        let label = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        inputs.push((label, read_pdb_file(p, &opts)?));
    }
    if fixtures {
        inputs.extend(molgeom::fixtures::sub_cell_void_suite());
    }
    let mut csv = format!("{BENCH_HEADER}\n");
    for (code, m) in &inputs {
        for row in benchmark_default(code, m, f.probe, res) {
            csv.push_str(&format!("{}\n", row.csv()));
        }
    }
    match out {
        Some(path) => std::fs::write(path, csv)?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn run_fetch(codes: &[String], dest: &Path, base: &str) -> Result<(), Error> {
    let fetch = FetchOptions { base_url: base.into(), ..Default::default() };
    for code in codes {
        println!("{}", fetch_pdb(code, dest, &fetch)?.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze { path, input, gate, dump } => run_analyze(path, input, *gate, dump.as_deref()),
        Command::Batch { list, out, input, pdb_dir, fetch_base_url, jobs } => {
            run_batch(list, out, input, pdb_dir, fetch_base_url, *jobs)
        }
        Command::Benchmark { paths, input, fixtures, grid_res, out } => {
            run_benchmark(paths, input, *fixtures, grid_res, out.as_deref())
        }
        Command::Fetch { codes, dest, fetch_base_url } => run_fetch(codes, dest, fetch_base_url),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
