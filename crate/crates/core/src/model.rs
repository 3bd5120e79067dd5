//! Balls, atoms, molecules and radius models.

use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

/// A sphere with an index into its owning arrangement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Vec3,
    pub radius: f64,
    pub id: usize,
}

impl Ball {
    pub fn new(id: usize, center: [f64; 3], radius: f64) -> Self {
        Ball { center: Vec3::new(center[0], center[1], center[2]), radius, id }
    }

    pub fn is_valid(&self) -> bool {
        self.radius > 0.0 && self.radius.is_finite() && self.center.iter().all(|c| c.is_finite())
    }

    /// Additive distance |p - c| - r.
    pub fn power_distance(&self, p: &Vec3) -> f64 {
        (p - self.center).norm() - self.radius
    }

    pub fn contains_ball(&self, other: &Ball) -> bool {
        (self.center - other.center).norm() + other.radius <= self.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub ball: Ball,
    pub serial: i64,
    pub name: String,
    pub element: String,
    pub residue_name: String,
    pub chain: char,
    pub residue_seq: i64,
    pub is_hetero: bool,
}

impl Atom {
    pub fn id(&self) -> usize {
        self.ball.id
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Molecule {
    pub atoms: Vec<Atom>,
    pub source_label: String,
}

impl Molecule {
    pub fn new(source_label: impl Into<String>, mut atoms: Vec<Atom>) -> Self {
        for (i, a) in atoms.iter_mut().enumerate() {
            a.ball.id = i;
        }
        Molecule { atoms, source_label: source_label.into() }
    }

    /// Builds a molecule of anonymous carbon-like atoms from raw balls.
    pub fn from_balls(source_label: impl Into<String>, balls: &[Ball]) -> Self {
        let atoms = balls
            .iter()
            .enumerate()
            .map(|(i, b)| Atom {
                ball: Ball { id: i, ..*b },
                serial: i as i64 + 1,
                name: "X".into(),
                element: "X".into(),
                residue_name: "UNK".into(),
                chain: 'A',
                residue_seq: 1,
                is_hetero: false,
            })
            .collect();
        Molecule::new(source_label, atoms)
    }

    pub fn number_of_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn get_all_atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn balls(&self) -> Vec<Ball> {
        self.atoms.iter().map(|a| a.ball).collect()
    }

    /// FNV-1a over coordinates and radii; keys the deterministic jitter and the cache.
    pub fn geometry_hash(&self) -> u64 {
        hash_balls(&self.balls())
    }
}

pub fn hash_balls(balls: &[Ball]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in balls {
        for v in [b.center.x, b.center.y, b.center.z, b.radius] {
            for byte in v.to_bits().to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiusKind {
    VanDerWaals,
    LeeRichards,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusModel {
    pub kind: RadiusKind,
    pub probe_radius: f64,
}

impl RadiusModel {
    pub const WATER_PROBE: f64 = 1.4;

    pub fn van_der_waals() -> Self {
        RadiusModel { kind: RadiusKind::VanDerWaals, probe_radius: 0.0 }
    }

    pub fn lee_richards(probe_radius: f64) -> Self {
        assert!(probe_radius >= 0.0, "probe radius must be non-negative");
        RadiusModel { kind: RadiusKind::LeeRichards, probe_radius }
    }

    pub fn probe(&self) -> f64 {
        match self.kind {
            RadiusKind::VanDerWaals => 0.0,
            RadiusKind::LeeRichards => self.probe_radius,
        }
    }
}

/// Balls under a radius model, with redundancy flags.
#[derive(Debug, Clone)]
pub struct EffectiveBalls {
    pub balls: Vec<Ball>,
    pub redundant: Vec<bool>,
    pub warnings: Vec<String>,
}

impl EffectiveBalls {
    pub fn non_redundant(&self) -> Vec<Ball> {
        self.balls.iter().zip(&self.redundant).filter(|(_, r)| !**r).map(|(b, _)| *b).collect()
    }

    pub fn n_non_redundant(&self) -> usize {
        self.redundant.iter().filter(|r| !**r).count()
    }
}

pub fn effective_balls(molecule: &Molecule, model: RadiusModel) -> EffectiveBalls {
    let probe = model.probe();
    let balls: Vec<Ball> = molecule
        .atoms
        .iter()
        .map(|a| Ball { radius: a.ball.radius + probe, ..a.ball })
        .collect();
    let (redundant, warnings) = mark_redundant(&balls);
    EffectiveBalls { balls, redundant, warnings }
}

/// Flags contained balls and later exact duplicates.
pub fn mark_redundant(balls: &[Ball]) -> (Vec<bool>, Vec<String>) {
    let n = balls.len();
    let mut redundant = vec![false; n];
    let mut warnings = Vec::new();
    if n == 0 {
        return (redundant, warnings);
    }
    let r_max = balls.iter().map(|b| b.radius).fold(0.0, f64::max);
    let grid = crate::spatial::SpatialGrid::new(balls, 2.0 * r_max);
    for i in 0..n {
        let bi = &balls[i];
        let mut hit = Vec::new();
        grid.query(&bi.center, r_max, &mut hit);
        for &j in &hit {
            if j == i || redundant[i] {
                continue;
            }
            let bj = &balls[j];
            if bj.center == bi.center && bj.radius == bi.radius {
                if j < i {
                    redundant[i] = true;
                    warnings.push(format!("ball {i} duplicates ball {j}; ignored"));
                }
            } else if bj.contains_ball(bi) {
                redundant[i] = true;
            }
        }
    }
    (redundant, warnings)
}
