//! Analysis report, batch rows and grid-versus-analytic benchmark rows.

use crate::error::{Error, GeomError, IoError};
use crate::geometry::MolecularGeometry;
use crate::model::{Molecule, RadiusModel};
use crate::oracle_grid::{grid_voids_with, Connectivity, GridSpec, DEFAULT_POINT_BUDGET};
use std::fmt;
use std::path::Path;
use std::time::Instant;

pub const CSV_HEADER: &str = "code,#atoms,volume,area,#voids,T(VD/QT),T(mass),T(void)";
pub const BENCH_HEADER: &str = "method,code,#atoms,#voids,total void volume,time ms";

/// Six significant digits, trailing zeros dropped.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let decimals = (5 - x.abs().log10().floor() as i32).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" { "0".into() } else { s }
}

fn ms(t: Instant) -> u128 {
    t.elapsed().as_millis()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoidLine {
    pub volume: f64,
    pub area: f64,
    pub atoms: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub label: String,
    pub probe: f64,
    pub atoms: usize,
    pub redundant: usize,
    pub boundary: usize,
    pub buried: usize,
    pub volume: f64,
    pub volume_with_voids: f64,
    pub area: f64,
    pub vdw_volume: f64,
    pub vdw_area: f64,
    pub voids: Vec<VoidLine>,
    pub channels: usize,
    pub widest_bottleneck: Option<f64>,
    pub widest_spine_length: Option<f64>,
}

pub fn analyze(geom: &MolecularGeometry, probe: f64, gate: f64) -> Result<Report, GeomError> {
    let lr = RadiusModel::lee_richards(probe);
    let patches = geom.patches(lr)?;
    let mp = patches.mass_properties();
    let vdw = geom.mass_properties(RadiusModel::van_der_waals())?;
    let boundary = patches.outer_atoms().len();
    let voids = patches
        .voids()
        .into_iter()
        .map(|v| VoidLine { volume: v.volume, area: v.area, atoms: v.contributing_atoms.len() })
        .collect();
    let channels = geom.channels(probe, gate);
    Ok(Report {
        label: geom.molecule.source_label.clone(),
        probe,
        atoms: geom.molecule.number_of_atoms(),
        redundant: patches.redundant.iter().filter(|r| **r).count(),
        boundary,
        buried: geom.molecule.number_of_atoms() - boundary,
        volume: mp.volume,
        volume_with_voids: mp.volume_with_voids,
        area: mp.area,
        vdw_volume: vdw.volume,
        vdw_area: vdw.area,
        voids,
        channels: channels.len(),
        widest_bottleneck: channels.first().map(|c| c.bottleneck_radius),
        widest_spine_length: channels.first().map(|c| c.length),
    })
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "structure: {}", self.label)?;
        writeln!(f, "probe: {}", self.probe)?;
        writeln!(f, "atoms: {} ({} redundant)", self.atoms, self.redundant)?;
        writeln!(f, "boundary atoms: {}", self.boundary)?;
        writeln!(f, "buried atoms: {}", self.buried)?;
        writeln!(f, "van der Waals volume: {}", sig6(self.vdw_volume))?;
        writeln!(f, "van der Waals area: {}", sig6(self.vdw_area))?;
        writeln!(f, "Lee-Richards volume: {}", sig6(self.volume))?;
        writeln!(f, "Lee-Richards volume with voids: {}", sig6(self.volume_with_voids))?;
        writeln!(f, "Lee-Richards area: {}", sig6(self.area))?;
        writeln!(f, "voids: {}", self.voids.len())?;
        for (i, v) in self.voids.iter().enumerate() {
            writeln!(f, "  void {}: volume {} area {} atoms {}", i + 1, sig6(v.volume), sig6(v.area), v.atoms)?;
        }
        writeln!(f, "channels: {}", self.channels)?;
        if let (Some(b), Some(l)) = (self.widest_bottleneck, self.widest_spine_length) {
            writeln!(f, "  widest bottleneck: {}", sig6(b))?;
            writeln!(f, "  spine length: {}", sig6(l))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchRow {
    pub code: String,
    pub atoms: usize,
    pub volume: f64,
    pub area: f64,
    pub voids: usize,
    pub t_qt_ms: u128,
    pub t_mass_ms: u128,
    pub t_void_ms: u128,
}

impl BatchRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.code,
            self.atoms,
            sig6(self.volume),
            sig6(self.area),
            self.voids,
            self.t_qt_ms,
            self.t_mass_ms,
            self.t_void_ms
        )
    }

    /// The row without its timing columns.
    pub fn values(&self) -> String {
        self.csv().split(',').take(5).collect::<Vec<_>>().join(",")
    }
}

/// Preprocesses (through the cache when given), then times mass properties
/// and voids under the Lee-Richards model.
pub fn batch_row(code: &str, molecule: Molecule, probe: f64, cache: Option<&Path>) -> Result<BatchRow, Error> {
    let t = Instant::now();
    let geom = match cache {
        Some(path) => MolecularGeometry::preprocess_cached(molecule, path)?,
        None => MolecularGeometry::preprocess(molecule)?,
    };
    let t_qt_ms = ms(t);
    let lr = RadiusModel::lee_richards(probe);
    let t = Instant::now();
    let mp = geom.mass_properties(lr)?;
    let t_mass_ms = ms(t);
    let t = Instant::now();
    let voids = geom.voids(lr)?;
    let t_void_ms = ms(t);
    Ok(BatchRow {
        code: code.into(),
        atoms: geom.molecule.number_of_atoms(),
        volume: mp.volume,
        area: mp.area,
        voids: voids.len(),
        t_qt_ms,
        t_mass_ms,
        t_void_ms,
    })
}

/// A count on the first line, then that many codes, whitespace separated.
pub fn parse_code_list(text: &str) -> Result<Vec<String>, IoError> {
    let mut words = text.split_whitespace();
    let bad = |reason: String| IoError::FileFormat { location: "code list".into(), reason };
    let n: usize = words
        .next()
        .ok_or_else(|| bad("missing count".into()))?
        .parse()
        .map_err(|_| bad("first entry is not a count".into()))?;
    let codes: Vec<String> = words.map(str::to_string).collect();
    if codes.len() != n {
        return Err(bad(format!("count says {n} codes, found {}", codes.len())));
    }
    Ok(codes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: String,
    pub code: String,
    pub atoms: usize,
    pub voids: usize,
    pub total_void_volume: f64,
    pub time_ms: u128,
    pub failed: Option<String>,
}

impl BenchRow {
    pub fn csv(&self) -> String {
        match &self.failed {
            Some(reason) => format!("{},{},{},failed,{},{}", self.method, self.code, self.atoms, reason.replace(',', ";"), self.time_ms),
            None => format!(
                "{},{},{},{},{},{}",
                self.method,
                self.code,
                self.atoms,
                self.voids,
                sig6(self.total_void_volume),
                self.time_ms
            ),
        }
    }
}

/// Analytic void count and volume, then one grid run per resolution.
pub fn benchmark(code: &str, molecule: &Molecule, probe: f64, resolutions: &[f64], budget: u64) -> Vec<BenchRow> {
    let model = RadiusModel::lee_richards(probe);
    let atoms = molecule.number_of_atoms();
    let mut rows = Vec::new();
    let t = Instant::now();
    let analytic = crate::surface::compute_voids(molecule, model);
    let time_ms = ms(t);
    rows.push(match analytic {
        Ok(v) => BenchRow {
            method: "analytic".into(),
            code: code.into(),
            atoms,
            voids: v.len(),
            total_void_volume: v.iter().map(|v| v.volume).sum(),
            time_ms,
            failed: None,
        },
        Err(e) => BenchRow { method: "analytic".into(), code: code.into(), atoms, voids: 0, total_void_volume: 0.0, time_ms, failed: Some(e.to_string()) },
    });
    for &res in resolutions {
        let t = Instant::now();
        let g = grid_voids_with(molecule, model, GridSpec::for_probe(res, probe), Connectivity::Six, budget);
        let time_ms = ms(t);
        let method = format!("grid-{res}");
        rows.push(match g {
            Ok(g) => BenchRow { method, code: code.into(), atoms, voids: g.count, total_void_volume: g.total_volume, time_ms, failed: None },
            Err(e) => BenchRow { method, code: code.into(), atoms, voids: 0, total_void_volume: 0.0, time_ms, failed: Some(e.to_string()) },
        });
    }
    rows
}

pub fn benchmark_default(code: &str, molecule: &Molecule, probe: f64, resolutions: &[f64]) -> Vec<BenchRow> {
    benchmark(code, molecule, probe, resolutions, DEFAULT_POINT_BUDGET)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn six_significant_digits() {
        let cases = [
            (7410.0123, "7410.01"),
            (66165.14, "66165.1"),
            (2393.33, "2393.33"),
            (0.0, "0"),
            (12.5, "12.5"),
            (0.000123456789, "0.000123457"),
            (1234567.8, "1234568"),
            (-1.234567891, "-1.23457"),
        ];
        for (x, s) in cases {
            assert_eq!(sig6(x), s);
        }
    }

    #[test]
    fn code_lists() {
        assert_eq!(parse_code_list("2\n1c26\n1d2k\n").unwrap(), vec!["1c26", "1d2k"]);
        assert!(parse_code_list("0\n").unwrap().is_empty());
        assert!(parse_code_list("3\n1c26\n").is_err());
        assert!(parse_code_list("x\n").is_err());
        assert!(parse_code_list("").is_err());
    }

    #[test]
    fn batch_row_for_cube() {
        let m = Molecule::from_balls("cube", &fixtures::cube_corners([0.0; 3]));
        let row = batch_row("cube", m, 0.5, None).unwrap();
        assert_eq!((row.atoms, row.voids), (8, 1));
        assert_eq!(row.csv().split(',').count(), CSV_HEADER.split(',').count());
    }

    #[test]
    fn report_lists_voids_and_channels() {
        let g = MolecularGeometry::preprocess(Molecule::from_balls("cube", &fixtures::cube_corners([0.0; 3]))).unwrap();
        let text = analyze(&g, 0.5, 0.5).unwrap().to_string();
        assert!(text.contains("voids: 1\n"), "{text}");
        let open = analyze(&g, 0.3, 0.3).unwrap();
        assert!(open.voids.is_empty() && open.channels >= 1);
    }

    #[test]
    fn grid_rows_fail_over_budget() {
        let m = Molecule::from_balls("cube", &fixtures::cube_corners([0.0; 3]));
        let rows = benchmark("cube", &m, 0.5, &[1.0, 0.01], 1_000_000);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].voids, 1);
        assert!(rows[1].failed.is_none());
        assert!(rows[2].failed.is_some() && rows[2].csv().contains("failed"));
    }
}
