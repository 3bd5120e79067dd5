//! Fixed-column PDB reading and writing, element radii, and a small
//! download client with an on-disk cache.

use crate::error::IoError;
use crate::model::{Atom, Ball, Molecule, Vec3};
use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

const BONDI_CSV: &str = include_str!("../data/bondi_vdw.csv");

/// Element radii in angstroms.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusTable {
    pub name: String,
    pub radii: BTreeMap<String, f64>,
    pub default_radius: f64,
}

impl RadiusTable {
    /// Bondi van der Waals radii; unlisted elements get 1.80.
    pub fn bondi() -> Self {
        Self::parse_csv("bondi", BONDI_CSV, 1.80).expect("bundled table is valid")
    }

    /// `element,radius` per line; a non-numeric first line is a header.
    pub fn parse_csv(name: &str, text: &str, default_radius: f64) -> Result<Self, IoError> {
        if !(default_radius > 0.0) {
            return Err(IoError::Precondition(format!("default radius {default_radius} must be positive")));
        }
        let mut radii = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| IoError::FileFormat { location: format!("{name}:{}", n + 1), reason: reason.into() };
            let (el, r) = line.split_once(',').ok_or_else(|| bad("expected element,radius"))?;
            let Ok(r) = r.trim().parse::<f64>() else {
                if n == 0 {
                    continue;
                }
                return Err(bad("radius is not a number"));
            };
            if !(r > 0.0) {
                return Err(bad("radius must be positive"));
            }
            radii.insert(el.trim().to_ascii_uppercase(), r);
        }
        Ok(RadiusTable { name: name.into(), radii, default_radius })
    }

    pub fn from_csv_file(path: &Path, default_radius: f64) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path)?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Self::parse_csv(&name, &text, default_radius)
    }

    pub fn radius(&self, element: &str) -> f64 {
        self.radii.get(&element.to_ascii_uppercase()).copied().unwrap_or(self.default_radius)
    }

    pub fn knows(&self, element: &str) -> bool {
        self.radii.contains_key(&element.to_ascii_uppercase())
    }
}

impl Default for RadiusTable {
    fn default() -> Self {
        Self::bondi()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AltLocPolicy {
    /// Blank or 'A'.
    First,
    All,
    Only(char),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseOptions {
    pub include_hetatm: bool,
    pub include_hydrogens: bool,
    pub include_waters: bool,
    /// Zero-based index among MODEL records.
    pub model_index: usize,
    pub altloc: AltLocPolicy,
    pub radii: RadiusTable,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            include_hetatm: false,
            include_hydrogens: true,
            include_waters: false,
            model_index: 0,
            altloc: AltLocPolicy::First,
            radii: RadiusTable::bondi(),
        }
    }
}

const WATERS: [&str; 5] = ["HOH", "WAT", "DOD", "H2O", "TIP"];

/// Element from the first two name columns, as PDB does for blank element fields.
fn element_from_name(name_cols: &str) -> String {
    let head: String = name_cols.chars().take(2).filter(|c| c.is_ascii_alphabetic()).collect();
    let head = head.to_ascii_uppercase();
    if head.len() == 2 && !name_cols.starts_with(|c: char| c.is_ascii_alphabetic()) {
        head[1..].to_string()
    } else if head.len() == 2 && name_cols.starts_with(['H', 'C', 'N', 'O', 'S', 'P']) && name_cols.trim_end().len() == 4 {
        // four-character names such as HG21 start in column 13
        head[..1].to_string()
    } else {
        head
    }
}

fn field(line: &str, n: usize, cols: (usize, usize)) -> Result<&str, IoError> {
    line.get(cols.0 - 1..cols.1.min(line.len())).filter(|_| line.len() >= cols.0).ok_or_else(|| IoError::MalformedRecord {
        line: n,
        columns: format!("{}-{}", cols.0, cols.1),
        reason: "record too short".into(),
    })
}

fn number<T: std::str::FromStr>(line: &str, n: usize, cols: (usize, usize), what: &str) -> Result<T, IoError> {
    let s = field(line, n, cols)?.trim();
    s.parse().map_err(|_| IoError::MalformedRecord {
        line: n,
        columns: format!("{}-{}", cols.0, cols.1),
        reason: format!("{what} {s:?} is not a number"),
    })
}

pub fn parse_pdb<R: BufRead>(reader: R, label: &str, options: &ParseOptions) -> Result<Molecule, IoError> {
    let mut atoms = Vec::new();
    let mut model: Option<usize> = None;
    let mut models_seen = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        let record = line.get(..6).unwrap_or(&line).trim_end();
        match record {
            "MODEL" => {
                model = Some(models_seen);
                models_seen += 1;
                continue;
            }
            "ENDMDL" => {
                if model == Some(options.model_index) {
                    break;
                }
                continue;
            }
            "ATOM" | "HETATM" => {}
            _ => continue,
        }
        if model.is_some_and(|m| m != options.model_index) || (model.is_none() && models_seen > 0) {
            continue;
        }
        let is_hetero = record == "HETATM";
        if is_hetero && !options.include_hetatm {
            continue;
        }
        if !line.is_ascii() {
            return Err(IoError::MalformedRecord { line: n, columns: "1-80".into(), reason: "non-ASCII characters".into() });
        }
        let alt = field(&line, n, (17, 17))?.chars().next().unwrap_or(' ');
        let keep_alt = match options.altloc {
            AltLocPolicy::First => alt == ' ' || alt == 'A',
            AltLocPolicy::All => true,
            AltLocPolicy::Only(c) => alt == ' ' || alt == c,
        };
        if !keep_alt {
            continue;
        }
        let residue_name = field(&line, n, (18, 20))?.trim().to_string();
        if WATERS.contains(&residue_name.as_str()) && !options.include_waters {
            continue;
        }
        let name_cols = field(&line, n, (13, 16))?;
        let element = match line.get(76..78.min(line.len())).map(str::trim) {
            Some(e) if !e.is_empty() => e.to_ascii_uppercase(),
            _ => element_from_name(name_cols),
        };
        if !options.include_hydrogens && (element == "H" || element == "D") {
            continue;
        }
        let x: f64 = number(&line, n, (31, 38), "x")?;
        let y: f64 = number(&line, n, (39, 46), "y")?;
        let z: f64 = number(&line, n, (47, 54), "z")?;
        let serial_text = field(&line, n, (7, 11))?.trim();
        let serial = if serial_text.is_empty() { atoms.len() as i64 + 1 } else { number(&line, n, (7, 11), "serial")? };
        let residue_text = field(&line, n, (23, 26))?.trim();
        let residue_seq = if residue_text.is_empty() { 0 } else { number(&line, n, (23, 26), "residue number")? };
        atoms.push(Atom {
            ball: Ball { center: Vec3::new(x, y, z), radius: options.radii.radius(&element), id: atoms.len() },
            serial,
            name: name_cols.trim().to_string(),
            element,
            residue_name,
            chain: field(&line, n, (22, 22))?.chars().next().unwrap_or(' '),
            residue_seq,
            is_hetero,
        });
    }
    if atoms.is_empty() {
        return Err(IoError::EmptyStructure);
    }
    Ok(Molecule::new(label, atoms))
}

pub fn parse_pdb_str(text: &str, label: &str, options: &ParseOptions) -> Result<Molecule, IoError> {
    parse_pdb(text.as_bytes(), label, options)
}

pub fn read_pdb_file(path: &Path, options: &ParseOptions) -> Result<Molecule, IoError> {
    let file = std::fs::File::open(path)?;
    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_pdb(std::io::BufReader::new(file), &label, options)
}

/// ATOM/HETATM records with coordinates, names, residues and elements only.
pub fn serialize_minimal(molecule: &Molecule) -> String {
    let mut out = String::new();
    for a in &molecule.atoms {
        let record = if a.is_hetero { "HETATM" } else { "ATOM" };
        let name = if a.name.len() >= 4 || a.element.len() == 2 { format!("{:<4.4}", a.name) } else { format!(" {:<3.3}", a.name) };
        let c = a.ball.center;
        out.push_str(&format!(
            "{record:<6}{:>5} {name} {:>3.3} {}{:>4}    {:>8.3}{:>8.3}{:>8.3}{:>6.2}{:>6.2}          {:>2.2}\n",
            a.serial % 100_000,
            a.residue_name,
            a.chain,
            a.residue_seq % 10_000,
            c.x,
            c.y,
            c.z,
            1.0,
            0.0,
            a.element,
        ));
    }
    out.push_str("END\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct FetchOptions {
    /// Files are requested as `<base_url>/<CODE>.pdb`.
    pub base_url: String,
    pub timeout: Duration,
}

pub const DEFAULT_FETCH_BASE: &str = "https://files.rcsb.org/download";

impl Default for FetchOptions {
    fn default() -> Self {
        FetchOptions { base_url: DEFAULT_FETCH_BASE.into(), timeout: Duration::from_secs(60) }
    }
}

pub fn is_valid_code(code: &str) -> bool {
    let b = code.as_bytes();
    b.len() == 4 && b[0].is_ascii_digit() && b[1..].iter().all(u8::is_ascii_alphanumeric)
}

/// Path a fetched entry is stored under.
pub fn cached_path(code: &str, dir: &Path) -> PathBuf {
    dir.join(format!("{}.pdb", code.to_ascii_lowercase()))
}

/// Downloads an entry into `dir` unless it is already there.
///
/// Proxies come from the usual environment variables. The file is written
/// under a temporary name and renamed, so concurrent callers never see a
/// partial file.
pub fn fetch_pdb(code: &str, dir: &Path, options: &FetchOptions) -> Result<PathBuf, IoError> {
    if !is_valid_code(code) {
        return Err(IoError::Precondition(format!("{code:?} is not a four-character structure code")));
    }
    let path = cached_path(code, dir);
    if path.is_file() {
        return Ok(path);
    }
    std::fs::create_dir_all(dir)?;
    let url = format!("{}/{}.pdb", options.base_url.trim_end_matches('/'), code.to_ascii_uppercase());
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(options.timeout))
        .proxy(ureq::Proxy::try_from_env())
        .build()
        .into();
    let mut response = match agent.get(&url).call() {
        Ok(r) => r,
        Err(ureq::Error::StatusCode(404)) => return Err(IoError::NotFound(code.into())),
        Err(e) => return Err(IoError::Network(format!("{url}: {e}"))),
    };
    let mut body = Vec::new();
    response
        .body_mut()
        .as_reader()
        .read_to_end(&mut body)
        .map_err(|e| IoError::Network(format!("{url}: {e}")))?;
    let tmp = dir.join(format!(".{}.{}.part", code.to_ascii_lowercase(), std::process::id()));
    std::fs::File::create(&tmp)?.write_all(&body)?;
    std::fs::rename(&tmp, &path)?;
    Ok(path)
}
