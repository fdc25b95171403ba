use super::PdeError;
use crate::crackmesh::CrackMesh;
use crate::geomkit::Point;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FieldKind {
    Real,
    Complex,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldValues {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// Piecewise-linear field on a cracked mesh, one value per DOF.
#[derive(Debug, Clone)]
pub struct FeField {
    pub mesh: Arc<CrackMesh>,
    pub values: FieldValues,
}

impl FeField {
    pub fn real(mesh: Arc<CrackMesh>, values: Vec<f64>) -> Result<Self, PdeError> {
        check_len(&mesh, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(PdeError::NonFinite);
        }
        Ok(FeField { mesh, values: FieldValues::Real(values) })
    }

    pub fn complex(mesh: Arc<CrackMesh>, values: Vec<Complex64>) -> Result<Self, PdeError> {
        check_len(&mesh, values.len())?;
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(PdeError::NonFinite);
        }
        Ok(FeField { mesh, values: FieldValues::Complex(values) })
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: Arc<CrackMesh>, f: impl Fn(Point) -> f64) -> Self {
        let v = (0..mesh.n_dofs()).map(|d| f(mesh.dof_point(d))).collect();
        FeField { mesh, values: FieldValues::Real(v) }
    }

    pub fn kind(&self) -> FieldKind {
        match self.values {
            FieldValues::Real(_) => FieldKind::Real,
            FieldValues::Complex(_) => FieldKind::Complex,
        }
    }

    pub fn len(&self) -> usize {
        match &self.values {
            FieldValues::Real(v) => v.len(),
            FieldValues::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match &self.values {
            FieldValues::Real(v) => Some(v),
            FieldValues::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&[Complex64]> {
        match &self.values {
            FieldValues::Complex(v) => Some(v),
            FieldValues::Real(_) => None,
        }
    }

    /// Real and imaginary parts as separate real fields.
    pub fn parts(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.values {
            FieldValues::Real(v) => (v.clone(), vec![0.0; v.len()]),
            FieldValues::Complex(v) => (v.iter().map(|z| z.re).collect(), v.iter().map(|z| z.im).collect()),
        }
    }

    /// Per-DOF values keyed by vertex coordinates, 17 significant digits.
    pub fn write_dump(&self, mut w: impl Write) -> std::io::Result<()> {
        let (re, im) = self.parts();
        for d in 0..self.len() {
            let p = self.mesh.dof_point(d);
            match self.kind() {
                FieldKind::Real => writeln!(w, "{:.16e} {:.16e} {:.16e}", p.x, p.y, re[d])?,
                FieldKind::Complex => writeln!(w, "{:.16e} {:.16e} {:.16e} {:.16e}", p.x, p.y, re[d], im[d])?,
            }
        }
        Ok(())
    }
}

fn check_len(mesh: &CrackMesh, n: usize) -> Result<(), PdeError> {
    if n != mesh.n_dofs() {
        return Err(PdeError::SizeMismatch { expected: mesh.n_dofs(), got: n });
    }
    Ok(())
}

type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// Scalar source term. Closures cannot be serialized.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ScalarSource {
    Const(f64),
    /// `c + gx x + gy y`
    Affine { c: f64, gx: f64, gy: f64 },
    /// `amp cos(kx x) cos(ky y)`
    CosProduct { amp: f64, kx: f64, ky: f64 },
    #[serde(skip)]
    Func(ScalarFn),
}

impl ScalarSource {
    pub fn eval(&self, p: Point) -> f64 {
        match self {
            ScalarSource::Const(c) => *c,
            ScalarSource::Affine { c, gx, gy } => c + gx * p.x + gy * p.y,
            ScalarSource::CosProduct { amp, kx, ky } => amp * (kx * p.x).cos() * (ky * p.y).cos(),
            ScalarSource::Func(f) => f(p),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarSource::Const(c) if *c == 0.0)
    }
}

impl fmt::Debug for ScalarSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarSource::Const(c) => write!(f, "Const({c})"),
            ScalarSource::Affine { c, gx, gy } => write!(f, "Affine({c}, {gx}, {gy})"),
            ScalarSource::CosProduct { amp, kx, ky } => write!(f, "CosProduct({amp}, {kx}, {ky})"),
            ScalarSource::Func(_) => write!(f, "Func"),
        }
    }
}

fn zero_source() -> ScalarSource {
    ScalarSource::Const(0.0)
}

/// Right-hand side `(f, F)` of the Neumann problem.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SourceData {
    pub f: ScalarSource,
    #[serde(default = "zero_source")]
    pub fx: ScalarSource,
    #[serde(default = "zero_source")]
    pub fy: ScalarSource,
}

impl SourceData {
    pub fn scalar(f: ScalarSource) -> Self {
        SourceData { f, fx: ScalarSource::Const(0.0), fy: ScalarSource::Const(0.0) }
    }

    pub fn constant(c: f64) -> Self {
        Self::scalar(ScalarSource::Const(c))
    }

    pub fn has_vector_part(&self) -> bool {
        !(self.fx.is_zero() && self.fy.is_zero())
    }
}
