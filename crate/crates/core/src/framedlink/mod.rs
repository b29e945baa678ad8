//! Framed circles in a presented ambient manifold and their ℤ₂ invariants.
//!
//! The frame at a sample stacks, as rows, the normals of M, the unit tangent
//! and the framing fields. After orthonormalization this is a loop in SO(N)
//! whose π₁ class, shifted by one and by the spin twist, is the index of the
//! circle.

mod ambient;
mod geometry;

use std::f64::consts::PI;
use std::sync::Arc;

pub use ambient::{
    AmbientKind, AmbientPresentation, ManifoldDefect, NormalField, SpinChoice, SpinTwist, Winding,
};
pub use geometry::{
    FramingSource, LoopSample, LoopSource, NormalFraming, SampledLoop, MIN_SAMPLES,
};

use crate::error::{Error, Result};
use crate::numkit::{orthonormalize, rows_to_matrix, Matrix, Tolerances, Vector};
use crate::report::{ComponentReport, Diagnostics, InvariantReport};
use crate::spinlift::{lift_loop, LiftOutcome, MatrixRefiner, RotationLoop};
use crate::z2::Z2;

/// Tolerance for the pointwise checks on manifold normals.
const NORMAL_TOL: f64 = 1e-8;

/// Points given as data must lie this close to M.
pub const ON_MANIFOLD_TOL: f64 = 1e-6;

fn frame_rows(normals: Vec<Vector>, tangent: &Vector, fields: Vec<Vector>) -> Vec<Vector> {
    let mut rows = normals;
    rows.push(tangent / tangent.norm());
    rows.extend(fields);
    rows
}

/// The orthonormalized frame matrix at one point, rows in the fixed order
/// [normals, tangent, fields].
pub fn frame_matrix_at(
    ambient: &AmbientPresentation,
    point: &Vector,
    tangent: &Vector,
    fields: Vec<Vector>,
    tol: &Tolerances,
) -> Result<Matrix> {
    let rows = frame_rows(ambient.normals_at(point), tangent, fields);
    if rows.len() != ambient.dimension() {
        return Err(Error::DimensionMismatch {
            expected: ambient.dimension(),
            actual: rows.len(),
        });
    }
    Ok(rows_to_matrix(&orthonormalize(&rows, tol)?))
}

/// Determinant sign of the frame at sample `k`.
pub fn frame_orientation(
    loop_: &SampledLoop,
    framing: &NormalFraming,
    ambient: &AmbientPresentation,
    k: usize,
    tol: &Tolerances,
) -> Result<f64> {
    let m = frame_matrix_at(
        ambient,
        &loop_.points()[k],
        &loop_.tangents()[k],
        framing.at(k),
        tol,
    )?;
    Ok(m.determinant().signum())
}

/// The loop of frame matrices along a framed circle. A refiner is attached
/// when both the loop and the framing can be resampled.
pub fn frame_matrix_loop(
    loop_: &SampledLoop,
    framing: &NormalFraming,
    ambient: &AmbientPresentation,
    tol: &Tolerances,
) -> Result<RotationLoop> {
    if framing.samples() != loop_.len() {
        return Err(Error::validation(
            "framing aligned with loop",
            format!(
                "{} framing samples for {} points",
                framing.samples(),
                loop_.len()
            ),
        ));
    }
    let mut samples = Vec::with_capacity(loop_.len());
    for k in 0..loop_.len() {
        let m = frame_matrix_at(
            ambient,
            &loop_.points()[k],
            &loop_.tangents()[k],
            framing.at(k),
            tol,
        )?;
        if m.determinant() < 0.0 {
            return Err(Error::OrientationMismatch { sample: k });
        }
        samples.push(m);
    }
    let refiner = match (loop_.source(), framing.source()) {
        (Some(ls), Some(fs)) => {
            let (ls, fs) = (ls.clone(), fs.clone());
            let ambient = ambient.clone();
            let tol = *tol;
            let index_loop = loop_.without_source();
            Some(Arc::new(move |s: f64| {
                let LoopSample { point, tangent } = ls.sample(s)?;
                let m = frame_matrix_at(&ambient, &point, &tangent, fs.fields(s)?, &tol)?;
                if m.determinant() < 0.0 {
                    return Err(Error::OrientationMismatch {
                        sample: index_loop.sample_index_before(s),
                    });
                }
                Ok(m)
            }) as MatrixRefiner)
        }
        _ => None,
    };
    RotationLoop::with_params(samples, loop_.params().to_vec(), refiner)
}

/// Index of a single framed circle together with the lift it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleIndex {
    pub index: Z2,
    pub loop_class: Z2,
    pub spin_twist: Z2,
    pub lift: LiftOutcome,
}

pub fn circle_index(
    loop_: &SampledLoop,
    framing: &NormalFraming,
    ambient: &AmbientPresentation,
    tol: &Tolerances,
) -> Result<CircleIndex> {
    let matrices = frame_matrix_loop(loop_, framing, ambient, tol)?;
    let lift = lift_loop(&matrices, tol)?;
    let spin_twist = ambient.spin_twist(loop_);
    Ok(CircleIndex {
        index: lift.class + Z2::ONE + spin_twist,
        loop_class: lift.class,
        spin_twist,
        lift,
    })
}

pub fn index_of_circle(
    loop_: &SampledLoop,
    framing: &NormalFraming,
    ambient: &AmbientPresentation,
    tol: &Tolerances,
) -> Result<Z2> {
    Ok(circle_index(loop_, framing, ambient, tol)?.index)
}

/// Rotate the first two framing fields by 2π·turns·s, s the loop parameter.
pub fn twist_framing(
    loop_: &SampledLoop,
    framing: &NormalFraming,
    turns: i64,
) -> Result<NormalFraming> {
    if framing.count() < 2 {
        return Err(Error::TooFewFields(framing.count()));
    }
    if framing.samples() != loop_.len() {
        return Err(Error::validation(
            "framing aligned with loop",
            format!(
                "{} framing samples for {} points",
                framing.samples(),
                loop_.len()
            ),
        ));
    }
    if turns == 0 {
        return Ok(framing.clone());
    }
    let rotate = move |s: f64, f: &mut [Vector]| {
        let (sn, cs) = (2.0 * PI * turns as f64 * s).sin_cos();
        let (a, b) = (f[0].clone(), f[1].clone());
        f[0] = &a * cs + &b * sn;
        f[1] = &b * cs - &a * sn;
    };
    let mut fields: Vec<Vec<Vector>> = framing.fields().to_vec();
    for (k, s) in loop_.params().iter().enumerate() {
        let mut at = [fields[0][k].clone(), fields[1][k].clone()];
        rotate(*s, &mut at);
        let [a, b] = at;
        fields[0][k] = a;
        fields[1][k] = b;
    }
    let source = framing.source().cloned().map(|src| {
        Arc::new(move |s: f64| {
            let mut f = src.fields(s)?;
            rotate(s, &mut f);
            Ok(f)
        }) as Arc<dyn FramingSource>
    });
    NormalFraming::with_source(fields, source)
}

/// One component of a framed link.
#[derive(Debug, Clone)]
pub struct FramedCircle {
    pub loop_: SampledLoop,
    pub framing: NormalFraming,
}

impl FramedCircle {
    pub fn new(loop_: SampledLoop, framing: NormalFraming) -> Self {
        FramedCircle { loop_, framing }
    }

    pub fn transformed(&self, p: &Matrix) -> Self {
        FramedCircle {
            loop_: self.loop_.transformed(p),
            framing: self.framing.transformed(p),
        }
    }

    pub fn cyclic_shift(&self, k: usize) -> Self {
        FramedCircle {
            loop_: self.loop_.cyclic_shift(k),
            framing: self.framing.cyclic_shift(k),
        }
    }

    /// Resample with `factor` times as many samples; needs sources.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let loop_ = self.loop_.refined(factor)?;
        let framing = self.framing.resampled_on(&loop_)?;
        Ok(FramedCircle { loop_, framing })
    }

    pub fn reversed(&self) -> Self {
        FramedCircle {
            loop_: self.loop_.reversed(),
            framing: self.framing.reversed(),
        }
    }

    /// Reverse the traversal if the frame at sample 0 is negatively oriented.
    /// Negating a field instead would change the framing class.
    pub fn oriented(self, ambient: &AmbientPresentation, tol: &Tolerances) -> Result<Self> {
        if frame_orientation(&self.loop_, &self.framing, ambient, 0, tol)? < 0.0 {
            Ok(self.reversed())
        } else {
            Ok(self)
        }
    }
}

/// A framed 1-dimensional submanifold of M, as a list of circles.
#[derive(Debug, Clone)]
pub struct FramedLink {
    ambient: AmbientPresentation,
    components: Vec<FramedCircle>,
}

impl FramedLink {
    /// Validates dimensions, framing count, membership in M and
    /// independence of the assembled frame at every sample.
    pub fn new(
        ambient: AmbientPresentation,
        components: Vec<FramedCircle>,
        tol: &Tolerances,
    ) -> Result<Self> {
        for (c, comp) in components.iter().enumerate() {
            validate_component(&ambient, comp, tol).map_err(|e| match e {
                Error::Validation { invariant, detail } => Error::Validation {
                    invariant,
                    detail: format!("component {c}: {detail}"),
                },
                other => other,
            })?;
        }
        Ok(FramedLink {
            ambient,
            components,
        })
    }

    pub fn empty(ambient: AmbientPresentation) -> Self {
        FramedLink {
            ambient,
            components: Vec::new(),
        }
    }

    pub fn ambient(&self) -> &AmbientPresentation {
        &self.ambient
    }

    pub fn components(&self) -> &[FramedCircle] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn disjoint_union(&self, other: &FramedLink) -> Result<FramedLink> {
        if !self.ambient.same_as(&other.ambient) {
            return Err(Error::AmbientMismatch(format!(
                "cannot join links in {} and {}",
                self.ambient.label(),
                other.ambient.label()
            )));
        }
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        Ok(FramedLink {
            ambient: self.ambient.clone(),
            components,
        })
    }

    /// Move the whole configuration, ambient included, by an isometry.
    pub fn transformed(&self, p: &Matrix) -> FramedLink {
        FramedLink {
            ambient: self.ambient.transformed(p),
            components: self.components.iter().map(|c| c.transformed(p)).collect(),
        }
    }

    pub fn map_components(
        &self,
        f: impl Fn(&FramedCircle) -> Result<FramedCircle>,
    ) -> Result<FramedLink> {
        Ok(FramedLink {
            ambient: self.ambient.clone(),
            components: self.components.iter().map(f).collect::<Result<_>>()?,
        })
    }
}

fn validate_component(
    ambient: &AmbientPresentation,
    comp: &FramedCircle,
    tol: &Tolerances,
) -> Result<()> {
    let n = ambient.dimension();
    let loop_ = &comp.loop_;
    let framing = &comp.framing;
    if loop_.dimension() != n {
        return Err(Error::validation(
            "points in ambient dimension",
            format!("points have dimension {}, ambient {n}", loop_.dimension()),
        ));
    }
    if framing.count() != ambient.framing_count() {
        return Err(Error::validation(
            "framing count = N - normals - 1",
            format!(
                "{} fields given, {} required",
                framing.count(),
                ambient.framing_count()
            ),
        ));
    }
    if framing.samples() != loop_.len() {
        return Err(Error::validation(
            "framing aligned with loop",
            format!(
                "{} framing samples for {} points",
                framing.samples(),
                loop_.len()
            ),
        ));
    }
    if let Some(v) = framing.fields().iter().flatten().find(|v| v.len() != n) {
        return Err(Error::validation(
            "framing vectors in ambient dimension",
            format!("field vector of dimension {}", v.len()),
        ));
    }
    // Data loops carry difference tangents, which are only O(h²) accurate.
    let tangent_tol = if loop_.source().is_some() {
        NORMAL_TOL
    } else {
        1e-2
    };
    for k in 0..loop_.len() {
        let x = &loop_.points()[k];
        let defect = ambient.defect(x);
        if !(defect <= ON_MANIFOLD_TOL) {
            return Err(Error::validation(
                "points on the manifold",
                format!("sample {k} is {defect:.3e} off the manifold"),
            ));
        }
        let normals = ambient.normals_at(x);
        let t = &loop_.tangents()[k] / loop_.tangents()[k].norm();
        for (i, a) in normals.iter().enumerate() {
            if a.dot(&t).abs() > tangent_tol {
                return Err(Error::validation(
                    "manifold normals orthogonal to the curve",
                    format!("normal {i} at sample {k}"),
                ));
            }
            for (j, b) in normals.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                if (a.dot(b) - target).abs() > NORMAL_TOL {
                    return Err(Error::validation(
                        "manifold normals orthonormal",
                        format!("normals {i},{j} at sample {k}"),
                    ));
                }
            }
        }
        let rows = frame_rows(normals, &loop_.tangents()[k], framing.at(k));
        if orthonormalize(&rows, tol).is_err() {
            return Err(Error::validation(
                "framing independent of tangent and normals",
                format!("frame degenerate at sample {k}"),
            ));
        }
    }
    Ok(())
}

/// Sum of the component indices.
pub fn kappa(link: &FramedLink, tol: &Tolerances) -> Result<Z2> {
    link.components
        .iter()
        .map(|c| index_of_circle(&c.loop_, &c.framing, &link.ambient, tol))
        .sum()
}

/// Pontryagin's invariant: the sum of the frame-loop classes plus the
/// number of components mod 2. Only defined for links in ℝᴺ.
pub fn delta_pontryagin(link: &FramedLink, tol: &Tolerances) -> Result<Z2> {
    if link.ambient.normal_count() > 0 || link.ambient.kind() != AmbientKind::Euclidean {
        return Err(Error::AmbientMismatch(format!(
            "delta needs a Euclidean ambient, got {}",
            link.ambient.label()
        )));
    }
    let mut total = Z2::parity(link.len() as i64);
    for c in &link.components {
        let matrices = frame_matrix_loop(&c.loop_, &c.framing, &link.ambient, tol)?;
        total += lift_loop(&matrices, tol)?.class;
    }
    Ok(total)
}

pub fn invariant_report(link: &FramedLink, tol: &Tolerances) -> Result<InvariantReport> {
    let mut diagnostics = Diagnostics::new(*tol);
    let mut components = Vec::with_capacity(link.len());
    for c in &link.components {
        let idx = circle_index(&c.loop_, &c.framing, &link.ambient, tol)?;
        diagnostics.lift_steps += idx.lift.steps;
        diagnostics.refinement_depth = diagnostics.refinement_depth.max(idx.lift.max_depth);
        components.push(ComponentReport {
            index: idx.index,
            winding_parity: link.ambient.winding(&c.loop_).map(Z2::parity),
            samples: c.loop_.len(),
            length: c.loop_.length(),
            loop_classes: vec![idx.loop_class],
        });
    }
    let mut report =
        InvariantReport::new(components, diagnostics).with_source(link.ambient.label());
    if link.ambient.kind() == AmbientKind::Euclidean {
        report.delta = Some(delta_pontryagin(link, tol)?);
    }
    Ok(report)
}

/// Closed-form framed circles used by the scenarios and tests.
pub mod standard {
    use super::*;

    fn basis(dim: usize, i: usize) -> Vector {
        let mut e = Vector::zeros(dim);
        e[i] = 1.0;
        e
    }

    /// Unit circle in the (x₁,x₂)-plane of ℝᴺ, traversed with the given
    /// orientation sign, offset by `center`.
    pub fn plane_circle(
        dim: usize,
        samples: usize,
        clockwise: bool,
        center: Vector,
    ) -> Result<SampledLoop> {
        let sign = if clockwise { -1.0 } else { 1.0 };
        let source = Arc::new(move |s: f64| {
            let (sn, cs) = (2.0 * PI * s).sin_cos();
            let mut point = center.clone();
            point[0] += cs;
            point[1] += sign * sn;
            let mut tangent = Vector::zeros(dim);
            tangent[0] = -2.0 * PI * sn;
            tangent[1] = sign * 2.0 * PI * cs;
            Ok(LoopSample { point, tangent })
        });
        SampledLoop::from_source(source, samples)
    }

    /// Constant fields e_i for the listed coordinate indices.
    pub fn constant_framing(
        loop_: &SampledLoop,
        dim: usize,
        axes: &[usize],
    ) -> Result<NormalFraming> {
        let axes = axes.to_vec();
        let src = Arc::new(move |_s: f64| Ok(axes.iter().map(|i| basis(dim, *i)).collect()));
        NormalFraming::from_source(src, loop_)
    }

    /// The circle S₀ ⊂ ℝᴺ with framing (V, E₃, …, E_N), V(x) = x − center.
    /// Clockwise traversal makes [T, V, E₃…] positively oriented.
    pub fn pontryagin_circle(dim: usize, samples: usize, center: Vector) -> Result<FramedCircle> {
        let loop_ = plane_circle(dim, samples, true, center.clone())?;
        let src = loop_.source().cloned().expect("analytic loop");
        let framing_src = Arc::new(move |s: f64| {
            let x = src.sample(s)?.point;
            let mut fields = vec![&x - &center];
            fields.extend((2..dim).map(|i| basis(dim, i)));
            Ok(fields)
        });
        let framing = NormalFraming::from_source(framing_src, &loop_)?;
        Ok(FramedCircle::new(loop_, framing))
    }

    /// Great circle in the (x₁,x₂)-plane of S^{N−1} ⊂ ℝᴺ with constant framing
    /// e₃, …, e_N.
    pub fn great_circle(dim: usize, samples: usize) -> Result<FramedCircle> {
        let loop_ = plane_circle(dim, samples, false, Vector::zeros(dim))?;
        let axes: Vec<usize> = (2..dim).collect();
        let framing = constant_framing(&loop_, dim, &axes)?;
        Ok(FramedCircle::new(loop_, framing))
    }

    /// S¹×{q} in the cylinder S¹×ℝᴺ⁻² ⊂ ℝᴺ with the product framing.
    pub fn product_circle(dim: usize, samples: usize, q: &[f64]) -> Result<FramedCircle> {
        let mut center = Vector::zeros(dim);
        for (i, v) in q.iter().enumerate() {
            center[i + 2] = *v;
        }
        let loop_ = plane_circle(dim, samples, false, center)?;
        let axes: Vec<usize> = (2..dim).collect();
        let framing = constant_framing(&loop_, dim, &axes)?;
        Ok(FramedCircle::new(loop_, framing))
    }
}
