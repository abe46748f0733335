use std::fmt;
use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{GaugeField, Grid2D, OperatorError};
use crate::linalg::CsrMatrix;
use crate::potential::{HalfLength, SolenoidSpec};

/// How the solenoid disk is treated on the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Barrier {
    /// Potential step of height `n` on nodes inside the disk.
    Finite(f64),
    /// Disk nodes removed (Dirichlet wall at the disk).
    HardWall,
}

impl Barrier {
    pub fn validate(&self) -> Result<(), OperatorError> {
        match *self {
            Barrier::Finite(n) if !(n >= 0.0 && n.is_finite()) => Err(OperatorError::Config(format!(
                "barrier height must be finite and nonnegative, got {n}"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Barrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Barrier::Finite(n) => write!(f, "{n}"),
            Barrier::HardWall => f.write_str("hard_wall"),
        }
    }
}

impl Serialize for Barrier {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Barrier::Finite(n) => s.serialize_f64(*n),
            Barrier::HardWall => s.serialize_str("hard_wall"),
        }
    }
}

impl<'de> Deserialize<'de> for Barrier {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(Barrier::Finite(n)),
            Raw::Text(t) if t == "hard_wall" => Ok(Barrier::HardWall),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "barrier must be a number or \"hard_wall\", got {t:?}"
            ))),
        }
    }
}

/// Which physical operator a lattice matrix approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Finite barrier, field leaks into the disk.
    Permeable,
    /// Disk removed, finite-length field outside.
    HardWall,
    /// Disk removed, infinite-solenoid field: the Aharonov–Bohm operator.
    Ab,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Permeable => "permeable",
            Variant::HardWall => "hard_wall",
            Variant::Ab => "ab",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorMeta {
    pub half_length: HalfLength,
    pub barrier: Barrier,
    pub variant: Variant,
    pub flux: f64,
    pub coupling: f64,
    pub radius: f64,
}

/// Magnetic lattice Hamiltonian restricted to its active nodes.
#[derive(Debug, Clone)]
pub struct DiscreteHamiltonian {
    grid: Grid2D,
    matrix: CsrMatrix,
    active: Vec<usize>,
    row_of: Vec<Option<usize>>,
    meta: OperatorMeta,
}

impl DiscreteHamiltonian {
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn meta(&self) -> &OperatorMeta {
        &self.meta
    }

    /// Grid node of each matrix row.
    pub fn active_nodes(&self) -> &[usize] {
        &self.active
    }

    /// Matrix row of a grid node, if the node is an unknown.
    pub fn row_of(&self, node: usize) -> Option<usize> {
        self.row_of.get(node).copied().flatten()
    }

    /// Zero-pads a row vector to the full grid.
    pub fn embed(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.node_count()];
        for (&node, &v) in self.active.iter().zip(x) {
            out[node] = v;
        }
        out
    }

    /// Drops grid values at nodes that are not unknowns.
    pub fn restrict(&self, full: &[Complex64]) -> Vec<Complex64> {
        self.active.iter().map(|&node| full[node]).collect()
    }

    /// Conjugates by the diagonal unitary `e^{iχ}`, `χ` given per grid node.
    ///
    /// Off-diagonal entries pick up `e^{i(χ_j − χ_k)}`; the diagonal is unchanged.
    pub fn gauge_transform(&self, chi: &[f64]) -> Result<Self, OperatorError> {
        if chi.len() != self.grid.node_count() {
            return Err(OperatorError::Config(format!(
                "gauge function has {} values for {} grid nodes",
                chi.len(),
                self.grid.node_count()
            )));
        }
        let mut triplets: Vec<(usize, usize, Complex64)> = Vec::with_capacity(self.matrix.nnz());
        for (r, c, v) in self.matrix.triplets() {
            if c < r {
                continue;
            }
            if c == r {
                triplets.push((r, c, v));
                continue;
            }
            let dchi = chi[self.active[r]] - chi[self.active[c]];
            let w = v * Complex64::from_polar(1.0, dchi);
            triplets.push((r, c, w));
            triplets.push((c, r, w.conj()));
        }
        Ok(Self {
            matrix: CsrMatrix::from_triplets(self.dim(), &triplets),
            ..self.clone()
        })
    }

    /// Writes `row col re im` triplets (0-based) after `#` header lines.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# dimension {}", self.dim())?;
        writeln!(
            w,
            "# grid extent {} points_per_side {} spacing {:.12e}",
            self.grid.extent,
            self.grid.points_per_side,
            self.grid.spacing()
        )?;
        writeln!(w, "# half_length {}", self.meta.half_length)?;
        writeln!(w, "# barrier {}", self.meta.barrier)?;
        writeln!(w, "# variant {}", self.meta.variant)?;
        writeln!(w, "# nnz {}", self.matrix.nnz())?;
        for (r, c, v) in self.matrix.triplets() {
            writeln!(w, "{r} {c} {:.17e} {:.17e}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// Assembles `(Hψ)_j = h⁻² Σ_k (ψ_j − e^{−iθ_{jk}} ψ_k) + V_j ψ_j` on the
/// active nodes, with `ψ = 0` on the outer ring and, for a hard wall, on the disk.
pub fn assemble(
    grid: &Grid2D,
    gauge: &GaugeField,
    barrier: Barrier,
    spec: &SolenoidSpec,
) -> Result<DiscreteHamiltonian, OperatorError> {
    grid.validate()?;
    barrier.validate()?;
    spec.validate()?;
    let a = spec.radius;
    let removed = |node: usize| grid.is_boundary(node) || (barrier == Barrier::HardWall && grid.inside_disk(node, a));

    if barrier == Barrier::HardWall && !(0..grid.node_count()).any(|node| grid.inside_disk(node, a)) {
        return Err(OperatorError::Config(format!(
            "hard wall of radius {a} contains no grid node (spacing {:.4})",
            grid.spacing()
        )));
    }

    let mut row_of = vec![None; grid.node_count()];
    let mut active = Vec::new();
    for node in 0..grid.node_count() {
        if !removed(node) {
            row_of[node] = Some(active.len());
            active.push(node);
        }
    }
    if active.is_empty() {
        return Err(OperatorError::Config("operator has no interior nodes".into()));
    }

    let inv_h2 = grid.spacing().powi(-2);
    let mut triplets = Vec::with_capacity(5 * active.len());
    for (r, &node) in active.iter().enumerate() {
        let potential = match barrier {
            Barrier::Finite(n) if grid.inside_disk(node, a) => n,
            _ => 0.0,
        };
        triplets.push((r, r, Complex64::new(4.0 * inv_h2 + potential, 0.0)));
        for nb in grid.neighbours(node) {
            let Some(c) = row_of[nb] else { continue };
            if c < r {
                continue;
            }
            let theta = gauge
                .phase(node, nb)
                .expect("lattice neighbours always carry a phase");
            let w = Complex64::from_polar(-inv_h2, -theta);
            triplets.push((r, c, w));
            triplets.push((c, r, w.conj()));
        }
    }

    let variant = match (barrier, spec.half_length) {
        (Barrier::Finite(_), _) => Variant::Permeable,
        (Barrier::HardWall, HalfLength::Infinite) => Variant::Ab,
        (Barrier::HardWall, HalfLength::Finite(_)) => Variant::HardWall,
    };
    Ok(DiscreteHamiltonian {
        grid: *grid,
        matrix: CsrMatrix::from_triplets(active.len(), &triplets),
        active,
        row_of,
        meta: OperatorMeta {
            half_length: spec.half_length,
            barrier,
            variant,
            flux: spec.flux,
            coupling: spec.coupling,
            radius: spec.radius,
        },
    })
}
