//! Presentations of the ambient spin manifold inside ℝᴺ.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::geometry::SampledLoop;
use crate::error::{Error, Result};
use crate::numkit::{Matrix, Vector};
use crate::z2::Z2;

/// A unit normal field of M ⊂ ℝᴺ, evaluated at points of M.
pub type NormalField = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// Evaluates the twisting class of a spin structure on a loop.
pub type SpinTwist = Arc<dyn Fn(&SampledLoop) -> Z2 + Send + Sync>;

/// Integer winding of a loop around the periodic factor of the ambient.
pub type Winding = Arc<dyn Fn(&SampledLoop) -> i64 + Send + Sync>;

/// Distance-like defect of a point from M, zero on M.
pub type ManifoldDefect = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmbientKind {
    Euclidean,
    Sphere,
    Cylinder,
    Custom,
}

/// The two spin structures on the cylinder S¹×ℝᴺ⁻².
///
/// `Standard` is the one extending over D²×ℝᴺ⁻²; `Nonstandard` differs from
/// it by the winding parity around the circle factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinChoice {
    #[default]
    Standard,
    Nonstandard,
}

impl std::str::FromStr for SpinChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(SpinChoice::Standard),
            "nonstandard" => Ok(SpinChoice::Nonstandard),
            other => Err(Error::Parse(format!(
                "spin structure must be `standard` or `nonstandard`, got `{other}`"
            ))),
        }
    }
}

/// M ⊂ ℝᴺ given by its unit normal fields, a spin twist and, for product
/// ambients, a winding evaluator.
#[derive(Clone)]
pub struct AmbientPresentation {
    kind: AmbientKind,
    label: String,
    dimension: usize,
    normals: Vec<NormalField>,
    spin_twist: SpinTwist,
    winding: Option<Winding>,
    defect: ManifoldDefect,
    spin: Option<SpinChoice>,
}

impl fmt::Debug for AmbientPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AmbientPresentation")
            .field("label", &self.label)
            .field("dimension", &self.dimension)
            .field("normals", &self.normals.len())
            .finish()
    }
}

fn zero_twist() -> SpinTwist {
    Arc::new(|_| Z2::ZERO)
}

fn radial_in_plane(x: &Vector) -> Vector {
    let r = x[0].hypot(x[1]);
    let mut n = Vector::zeros(x.len());
    n[0] = x[0] / r;
    n[1] = x[1] / r;
    n
}

impl AmbientPresentation {
    /// ℝᴺ itself.
    pub fn euclidean(dimension: usize) -> Self {
        AmbientPresentation {
            kind: AmbientKind::Euclidean,
            label: format!("R^{dimension}"),
            dimension,
            normals: Vec::new(),
            spin_twist: zero_twist(),
            winding: None,
            defect: Arc::new(|_| 0.0),
            spin: None,
        }
    }

    /// The unit sphere Sᴺ⁻¹ ⊂ ℝᴺ with its unique spin structure.
    pub fn sphere(dimension: usize) -> Self {
        AmbientPresentation {
            kind: AmbientKind::Sphere,
            label: format!("S^{}", dimension - 1),
            dimension,
            normals: vec![Arc::new(|x: &Vector| x / x.norm())],
            spin_twist: zero_twist(),
            winding: None,
            defect: Arc::new(|x: &Vector| (x.norm() - 1.0).abs()),
            spin: None,
        }
    }

    /// S¹×ℝᴺ⁻² ⊂ ℝᴺ, the circle being the unit circle of the first two
    /// coordinates.
    pub fn cylinder(dimension: usize, spin: SpinChoice) -> Self {
        assert!(dimension >= 3, "cylinder needs N >= 3");
        let winding: Winding = Arc::new(|l: &SampledLoop| l.winding_number(0, 1));
        let spin_twist: SpinTwist = match spin {
            SpinChoice::Standard => zero_twist(),
            SpinChoice::Nonstandard => {
                let w = winding.clone();
                Arc::new(move |l: &SampledLoop| Z2::parity(w(l)))
            }
        };
        let tag = match spin {
            SpinChoice::Standard => "standard",
            SpinChoice::Nonstandard => "nonstandard",
        };
        AmbientPresentation {
            kind: AmbientKind::Cylinder,
            label: format!("S^1xR^{} ({tag})", dimension - 2),
            dimension,
            normals: vec![Arc::new(radial_in_plane)],
            spin_twist,
            winding: Some(winding),
            defect: Arc::new(|x: &Vector| (x[0].hypot(x[1]) - 1.0).abs()),
            spin: Some(spin),
        }
    }

    pub fn custom(
        label: impl Into<String>,
        dimension: usize,
        normals: Vec<NormalField>,
        spin_twist: Option<SpinTwist>,
        winding: Option<Winding>,
        defect: ManifoldDefect,
    ) -> Self {
        AmbientPresentation {
            kind: AmbientKind::Custom,
            label: label.into(),
            dimension,
            normals,
            spin_twist: spin_twist.unwrap_or_else(zero_twist),
            winding,
            defect,
            spin: None,
        }
    }

    /// Replace the spin structure by one differing from it by `twist`.
    pub fn with_spin_twist(mut self, twist: SpinTwist) -> Self {
        let base = self.spin_twist.clone();
        self.spin_twist = Arc::new(move |l: &SampledLoop| base(l) + twist(l));
        self.label = format!("{} (twisted)", self.label);
        if self.kind == AmbientKind::Cylinder {
            self.kind = AmbientKind::Custom;
        }
        self.spin = None;
        self
    }

    /// The image of M under the fixed linear isometry `p`.
    pub fn transformed(&self, p: &Matrix) -> Self {
        let pt = p.transpose();
        let normals = self
            .normals
            .iter()
            .map(|n| {
                let (n, p, pt) = (n.clone(), p.clone(), pt.clone());
                Arc::new(move |x: &Vector| &p * n(&(&pt * x))) as NormalField
            })
            .collect();
        let twist = {
            let (t, pt) = (self.spin_twist.clone(), pt.clone());
            Arc::new(move |l: &SampledLoop| t(&l.transformed(&pt))) as SpinTwist
        };
        let winding = self.winding.clone().map(|w| {
            let pt = pt.clone();
            Arc::new(move |l: &SampledLoop| w(&l.transformed(&pt))) as Winding
        });
        let defect = {
            let (d, pt) = (self.defect.clone(), pt.clone());
            Arc::new(move |x: &Vector| d(&(&pt * x))) as ManifoldDefect
        };
        // ℝᴺ and the round sphere are carried to themselves; the cylinder is not.
        let (kind, spin) = match self.kind {
            AmbientKind::Euclidean | AmbientKind::Sphere => (self.kind, self.spin),
            _ => (AmbientKind::Custom, None),
        };
        AmbientPresentation {
            kind,
            label: format!("{} (moved)", self.label),
            dimension: self.dimension,
            normals,
            spin_twist: twist,
            winding,
            defect,
            spin,
        }
    }

    pub fn kind(&self) -> AmbientKind {
        self.kind
    }

    /// The cylinder's spin structure; `None` elsewhere.
    pub fn spin_choice(&self) -> Option<SpinChoice> {
        self.spin
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn normal_count(&self) -> usize {
        self.normals.len()
    }

    pub fn intrinsic_dimension(&self) -> usize {
        self.dimension - self.normals.len()
    }

    /// Number of framing fields of a circle in M.
    pub fn framing_count(&self) -> usize {
        self.intrinsic_dimension() - 1
    }

    pub fn normals_at(&self, x: &Vector) -> Vec<Vector> {
        self.normals.iter().map(|n| n(x)).collect()
    }

    pub fn spin_twist(&self, loop_: &SampledLoop) -> Z2 {
        (self.spin_twist)(loop_)
    }

    pub fn winding(&self, loop_: &SampledLoop) -> Option<i64> {
        self.winding.as_ref().map(|w| w(loop_))
    }

    pub fn has_periodic_factor(&self) -> bool {
        self.winding.is_some()
    }

    pub fn defect(&self, x: &Vector) -> f64 {
        (self.defect)(x)
    }

    /// Two presentations are treated as the same ambient when their labels
    /// and dimensions agree.
    pub fn same_as(&self, other: &Self) -> bool {
        self.label == other.label && self.dimension == other.dimension
    }
}
