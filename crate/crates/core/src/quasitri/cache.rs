//! "MGQT 1" text cache: balls, cells with neighbours and tangent spheres,
//! vertex-free faces and edges, worlds, CRC32 footer.

use super::{annotate_beta_intervals, dual_transform, QuasiTriangulation};
use crate::awvd::raw::{away_sign, RawDiagram, RawEdge, RawEnd, RawVertex};
use crate::awvd::{finish, jitter_balls, working_balls, EdgeEnd, Perturbation};
use crate::error::{Error, IoError};
use crate::model::{mark_redundant, Ball, Vec3};
use crate::predicates::{TangentSphere, Tolerances, Trisector};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const MAGIC: &str = "MGQT 1";

/// `<dir>/<stem of source>.mgqt`
pub fn cache_path(source: &Path, dir: &Path) -> PathBuf {
    let stem = source.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "structure".into());
    dir.join(format!("{stem}.mgqt"))
}

fn render(qt: &QuasiTriangulation) -> String {
    let vd = &qt.vd;
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "SOURCE {:016x}", qt.source_vd_hash);
    let _ = writeln!(s, "TOLERANCES {} {} {}", vd.tol.eps_geom, vd.tol.eps_det, vd.tol.jitter_magnitude);
    match &vd.perturbation {
        None => s.push_str("PERTURBATION none\n"),
        Some(p) => {
            let _ = writeln!(s, "PERTURBATION {:016x} {} {}", p.key, p.magnitude, p.reason.replace('\n', " "));
        }
    }
    let _ = writeln!(s, "VERTICES {}", vd.input_balls.len());
    for b in &vd.input_balls {
        let _ = writeln!(s, "{} {} {} {} {}", b.id, b.center.x, b.center.y, b.center.z, b.radius);
    }
    let _ = writeln!(s, "CELLS {}", vd.vertices.len());
    for (v, vx) in vd.vertices.iter().enumerate() {
        let mut nb = [0i64; 4];
        for k in 0..4 {
            let (a, b) = vd.edges[vx.incident_edges[k]].ends.expect("vertex edges have ends");
            let other = if a == EdgeEnd::Vertex(v) { b } else { a };
            nb[k] = match other {
                EdgeEnd::Vertex(w) => w as i64,
                EdgeEnd::Infinite => -1,
            };
        }
        let t = &vx.tangent;
        let q = vx.balls;
        let _ = writeln!(
            s,
            "{} {} {} {} {} {} {} {} {} {} {} {}",
            q[0], q[1], q[2], q[3], nb[0], nb[1], nb[2], nb[3], t.center.x, t.center.y, t.center.z, t.radius
        );
    }
    let free_faces: Vec<[usize; 3]> = vd
        .edges
        .iter()
        .filter(|e| !matches!(e.ends, Some((EdgeEnd::Vertex(_), _)) | Some((_, EdgeEnd::Vertex(_)))))
        .map(|e| e.equidistant_balls)
        .collect();
    let _ = writeln!(s, "FREE_FACES {}", free_faces.len());
    for t in free_faces {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    let free_edges: Vec<[usize; 2]> =
        (0..vd.faces.len()).filter(|&f| vd.face_edges(f).is_empty()).map(|f| vd.faces[f].defining_pair).collect();
    let _ = writeln!(s, "FREE_EDGES {}", free_edges.len());
    for p in free_edges {
        let _ = writeln!(s, "{} {}", p[0], p[1]);
    }
    let _ = writeln!(s, "WORLDS {}", qt.worlds.len());
    for w in &qt.worlds {
        let _ = write!(s, "{} {}", w.is_root as u8, w.entrances.len());
        for e in &w.entrances {
            let _ = write!(s, " {e}");
        }
        s.push('\n');
    }
    s.push_str("END\n");
    s
}

pub fn save_qt(qt: &QuasiTriangulation, path: &Path) -> Result<(), Error> {
    let body = render(qt);
    let crc = crc32fast::hash(body.as_bytes());
    std::fs::write(path, format!("{body}CRC32 {crc:08x}\n"))?;
    Ok(())
}

struct Reader<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

fn bad(location: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Io(IoError::FileFormat { location: location.into(), reason: reason.into() })
}

impl<'a> Reader<'a> {
    fn next(&mut self, record: &str) -> Result<(usize, &'a str), Error> {
        let line = self.pos + 1;
        let text = self.lines.get(self.pos).ok_or_else(|| bad(format!("line {line} ({record})"), "unexpected end of file"))?;
        self.pos += 1;
        Ok((line, text))
    }

    fn header(&mut self, name: &str) -> Result<(usize, Vec<&'a str>), Error> {
        let (line, text) = self.next(&format!("{name} header"))?;
        let mut f = text.split_whitespace();
        if f.next() != Some(name) {
            return Err(bad(format!("line {line}"), format!("expected {name} section")));
        }
        Ok((line, f.collect()))
    }

    fn count(&mut self, name: &str) -> Result<usize, Error> {
        let (line, f) = self.header(name)?;
        f.first().and_then(|x| x.parse().ok()).ok_or_else(|| bad(format!("line {line}"), format!("bad {name} count")))
    }

    fn record(&mut self, name: &str, i: usize, width: usize) -> Result<(usize, Vec<&'a str>), Error> {
        let (line, text) = self.next(&format!("{name} record {i}"))?;
        let f: Vec<&str> = text.split_whitespace().collect();
        if f.len() != width {
            return Err(bad(format!("line {line} ({name} record {i})"), format!("expected {width} fields, found {}", f.len())));
        }
        Ok((line, f))
    }
}

fn num<T: std::str::FromStr>(x: &str, line: usize, what: &str) -> Result<T, Error> {
    x.parse().map_err(|_| bad(format!("line {line}"), format!("bad {what} '{x}'")))
}

pub fn load_qt(path: &Path) -> Result<QuasiTriangulation, Error> {
    let text = std::fs::read_to_string(path)?;
    parse(&text)
}

fn parse(text: &str) -> Result<QuasiTriangulation, Error> {
    let mut r = Reader { lines: text.lines().collect(), pos: 0 };
    match r.lines.first() {
        Some(&l) if l.trim_end() == MAGIC => r.pos = 1,
        _ => return Err(bad("line 1", "missing magic")),
    }
    let (line, f) = r.header("SOURCE")?;
    let source = f.first().and_then(|x| u64::from_str_radix(x, 16).ok()).ok_or_else(|| bad(format!("line {line}"), "bad source hash"))?;
    let (line, f) = r.header("TOLERANCES")?;
    if f.len() != 3 {
        return Err(bad(format!("line {line}"), "expected three tolerances"));
    }
    let tol = Tolerances { eps_geom: num(f[0], line, "tolerance")?, eps_det: num(f[1], line, "tolerance")?, jitter_magnitude: num(f[2], line, "tolerance")? };
    let (line, text_line) = r.next("PERTURBATION header")?;
    let pert = match text_line.strip_prefix("PERTURBATION ") {
        Some("none") => None,
        Some(rest) => {
            let mut parts = rest.splitn(3, ' ');
            let key = parts.next().and_then(|x| u64::from_str_radix(x, 16).ok()).ok_or_else(|| bad(format!("line {line}"), "bad perturbation key"))?;
            let magnitude = num(parts.next().unwrap_or(""), line, "perturbation magnitude")?;
            Some(Perturbation { key, magnitude, reason: parts.next().unwrap_or("").to_string() })
        }
        None => return Err(bad(format!("line {line}"), "expected PERTURBATION section")),
    };

    let n = r.count("VERTICES")?;
    let mut input = Vec::with_capacity(n);
    for i in 0..n {
        let (line, f) = r.record("VERTICES", i, 5)?;
        let id: usize = num(f[0], line, "ball id")?;
        if id != i {
            return Err(bad(format!("line {line} (VERTICES record {i})"), "ids must be consecutive"));
        }
        let c = [num(f[1], line, "coordinate")?, num(f[2], line, "coordinate")?, num(f[3], line, "coordinate")?];
        input.push(Ball::new(id, c, num(f[4], line, "radius")?));
    }
    let (redundant, _) = mark_redundant(&input);
    let geometry = match &pert {
        Some(p) => jitter_balls(&input, p.key, p.magnitude),
        None => input.clone(),
    };
    let work = working_balls(&geometry, &redundant);
    let local: HashMap<usize, usize> = work.iter().enumerate().map(|(i, b)| (b.id, i)).collect();
    let to_local = |id: usize, line: usize| local.get(&id).copied().ok_or_else(|| bad(format!("line {line}"), format!("ball {id} is redundant or unknown")));

    let m = r.count("CELLS")?;
    let mut raw = RawDiagram::default();
    let mut neighbours = Vec::with_capacity(m);
    for i in 0..m {
        let (line, f) = r.record("CELLS", i, 12)?;
        let mut quad = [0; 4];
        for k in 0..4 {
            quad[k] = to_local(num(f[k], line, "ball id")?, line)?;
        }
        let mut nb = [0i64; 4];
        for k in 0..4 {
            nb[k] = num(f[4 + k], line, "neighbour")?;
            if nb[k] < -1 || nb[k] >= m as i64 {
                return Err(bad(format!("line {line} (CELLS record {i})"), "neighbour out of range"));
            }
        }
        let center = Vec3::new(num(f[8], line, "coordinate")?, num(f[9], line, "coordinate")?, num(f[10], line, "coordinate")?);
        raw.vertices.push(RawVertex { quad, sphere: TangentSphere { center, radius: num(f[11], line, "radius")? } });
        neighbours.push((line, nb));
    }
    for (v, &(line, nb)) in neighbours.iter().enumerate() {
        let q = raw.vertices[v].quad;
        for k in 0..4 {
            let w = nb[k];
            if w >= 0 && (w as usize) < v {
                continue;
            }
            let t = [q[(k + 1) % 4], q[(k + 2) % 4], q[(k + 3) % 4]];
            let mut t = t;
            t.sort_unstable();
            let tri = Trisector::new([&work[t[0]], &work[t[1]], &work[t[2]]], &tol)
                .map_err(|e| bad(format!("line {line} (CELLS record {v})"), e.to_string()))?;
            let sph = raw.vertices[v].sphere;
            let s = tri.param_of(&sph.center, sph.radius);
            let sigma = away_sign(&work, &tri, t, q[k], s);
            let ends = if w < 0 {
                if sigma > 0.0 {
                    (RawEnd::Vertex(v), RawEnd::Infinite)
                } else {
                    (RawEnd::Infinite, RawEnd::Vertex(v))
                }
            } else {
                let w = w as usize;
                let forward = if tri.is_closed() {
                    sigma > 0.0
                } else {
                    let o = raw.vertices[w].sphere;
                    tri.param_of(&o.center, o.radius) > s
                };
                if forward {
                    (RawEnd::Vertex(v), RawEnd::Vertex(w))
                } else {
                    (RawEnd::Vertex(w), RawEnd::Vertex(v))
                }
            };
            raw.edges.push(RawEdge { triple: t, ends: Some(ends), s0: 0.0, s1: 0.0 });
        }
    }
    let k = r.count("FREE_FACES")?;
    for i in 0..k {
        let (line, f) = r.record("FREE_FACES", i, 3)?;
        let mut t = [0; 3];
        for j in 0..3 {
            t[j] = to_local(num(f[j], line, "ball id")?, line)?;
        }
        let tri = Trisector::new([&work[t[0]], &work[t[1]], &work[t[2]]], &tol)
            .map_err(|e| bad(format!("line {line} (FREE_FACES record {i})"), e.to_string()))?;
        let ends = if tri.is_closed() { None } else { Some((RawEnd::Infinite, RawEnd::Infinite)) };
        raw.edges.push(RawEdge { triple: t, ends, s0: 0.0, s1: 0.0 });
    }
    let k = r.count("FREE_EDGES")?;
    for i in 0..k {
        let (line, f) = r.record("FREE_EDGES", i, 2)?;
        raw.free_pairs.push([to_local(num(f[0], line, "ball id")?, line)?, to_local(num(f[1], line, "ball id")?, line)?]);
    }
    let w = r.count("WORLDS")?;
    let mut worlds = Vec::with_capacity(w);
    for i in 0..w {
        let (line, text_line) = r.next(&format!("WORLDS record {i}"))?;
        let f: Vec<&str> = text_line.split_whitespace().collect();
        if f.len() < 2 {
            return Err(bad(format!("line {line} (WORLDS record {i})"), "expected root flag and entrance count"));
        }
        let root: u8 = num(f[0], line, "root flag")?;
        let c: usize = num(f[1], line, "entrance count")?;
        if f.len() != 2 + c {
            return Err(bad(format!("line {line} (WORLDS record {i})"), "entrance count mismatch"));
        }
        let ents: Vec<usize> = f[2..].iter().map(|x| num(x, line, "edge id")).collect::<Result<_, _>>()?;
        worlds.push((root == 1, ents));
    }
    let (line, end) = r.next("END")?;
    if end.trim_end() != "END" {
        return Err(bad(format!("line {line}"), "expected END"));
    }
    let payload_len: usize = r.lines[..r.pos].iter().map(|l| l.len() + 1).sum();
    let (line, footer) = r.next("CRC32 footer")?;
    let stored = footer
        .strip_prefix("CRC32 ")
        .and_then(|x| u32::from_str_radix(x.trim(), 16).ok())
        .ok_or_else(|| bad(format!("line {line}"), "bad CRC32 footer"))?;
    if text.len() < payload_len || crc32fast::hash(&text.as_bytes()[..payload_len]) != stored {
        return Err(bad(format!("line {line}"), "checksum mismatch"));
    }

    let vd = finish(&input, &geometry, &redundant, &tol, pert, &work, raw).map_err(|e| bad("CELLS", e.to_string()))?;
    let qt = annotate_beta_intervals(dual_transform(vd)?);
    if qt.source_vd_hash != source {
        return Err(bad("SOURCE", "rebuilt structure does not match the recorded hash"));
    }
    let got: Vec<(bool, Vec<usize>)> = qt.worlds.iter().map(|w| (w.is_root, w.entrances.clone())).collect();
    if got != worlds {
        return Err(bad("WORLDS", "rebuilt worlds do not match the recorded ones"));
    }
    Ok(qt)
}

#[cfg(test)]
pub(super) fn parse_str(text: &str) -> Result<QuasiTriangulation, Error> {
    parse(text)
}

#[cfg(test)]
pub(super) fn render_str(qt: &QuasiTriangulation) -> String {
    let body = render(qt);
    format!("{body}CRC32 {:08x}\n", crc32fast::hash(body.as_bytes()))
}
