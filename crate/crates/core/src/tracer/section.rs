//! Zero loci of sections of E = ⟨v⟩^⊥ ⊂ TSⁿ⁺¹ and their index.
//!
//! Along a zero circle C, an auxiliary closed frame u of ν(C) ⊂ TM gives two
//! matrix loops, [x, T, u] and [x, v, dw(u)]. The unknown spin framing of E
//! cancels between them, and the index is the sum of their classes plus one.

use std::sync::Arc;

use super::map::{trace_seeds, MatrixMap};
use super::{min_singular_value, CurveSystem, TraceOptions, TracedCurve, TRANSVERSALITY_MIN};
use crate::error::{Error, Result};
use crate::framedlink::{
    frame_matrix_loop, AmbientPresentation, FramedCircle, FramingSource, NormalFraming, SampledLoop,
};
use crate::numkit::{
    complete_basis, fd_step, givens_factorization, jacobian_fd, orthonormalize, project_out,
    rows_to_matrix, Givens, Matrix, Tolerances, Vector,
};
use crate::report::{ComponentReport, Diagnostics, InvariantReport};
use crate::spinlift::{lift_loop, MatrixRefiner, RotationLoop};
use crate::z2::Z2;

/// A vector field on the unit sphere of ℝᴺ.
pub type TangentField = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// Pointwise tolerance for the tangency and splitting conditions.
const FIELD_TOL: f64 = 1e-8;

#[derive(Clone)]
pub struct SectionSpec {
    /// M is the unit sphere of ℝᴺ.
    pub dimension: usize,
    /// Unit tangent field splitting TM = ⟨v⟩ ⊕ E.
    pub v: TangentField,
    /// Section of E.
    pub w: TangentField,
    /// Optional analytic Jacobian of `w` as a map ℝᴺ → ℝᴺ.
    pub dw: Option<MatrixMap>,
}

impl std::fmt::Debug for SectionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SectionSpec")
            .field("dimension", &self.dimension)
            .field("analytic_dw", &self.dw.is_some())
            .finish()
    }
}

impl SectionSpec {
    pub fn new(dimension: usize, v: TangentField, w: TangentField) -> Self {
        SectionSpec {
            dimension,
            v,
            w,
            dw: None,
        }
    }

    /// Check |v| = 1, v ⊥ x, w ⊥ x and w ⊥ v at a point of the sphere.
    pub fn check_at(&self, x: &Vector) -> Result<()> {
        let x = x / x.norm();
        let (v, w) = ((self.v)(&x), (self.w)(&x));
        let defects = [
            ("|v| = 1", (v.norm() - 1.0).abs()),
            ("v tangent", v.dot(&x).abs()),
            ("w tangent", w.dot(&x).abs()),
            ("w orthogonal to v", w.dot(&v).abs()),
        ];
        for (name, d) in defects {
            if !(d <= FIELD_TOL) {
                return Err(Error::validation(
                    name,
                    format!("defect {d:.3e} at {:?}", x.as_slice()),
                ));
            }
        }
        Ok(())
    }

    /// Projection onto E_x.
    fn project_to_fiber(&self, x: &Vector, y: &Vector) -> Vector {
        let xh = x / x.norm();
        project_out(y, &[xh.clone(), (self.v)(&xh)])
    }

    /// Derivative of `w` at `x` in direction `u`, projected to E_x.
    fn dw_along(&self, x: &Vector, u: &Vector) -> Vector {
        let raw = match &self.dw {
            Some(j) => match j(x) {
                Ok(m) => m * u,
                Err(_) => self.dw_fd(x, u),
            },
            None => self.dw_fd(x, u),
        };
        self.project_to_fiber(x, &raw)
    }

    fn dw_fd(&self, x: &Vector, u: &Vector) -> Vector {
        let h = fd_step(x);
        ((self.w)(&(x + u * h)) - (self.w)(&(x - u * h))) / (2.0 * h)
    }

    pub fn ambient(&self) -> AmbientPresentation {
        AmbientPresentation::sphere(self.dimension)
    }
}

/// w written in an orthonormal basis of E_x, plus the sphere equation.
struct SectionSystem {
    spec: SectionSpec,
    tol: Tolerances,
}

impl SectionSystem {
    fn fiber_basis(&self, x: &Vector) -> Result<Matrix> {
        let xh = x / x.norm();
        let frame = orthonormalize(&[xh.clone(), (self.spec.v)(&xh)], &self.tol)?;
        Ok(rows_to_matrix(&complete_basis(&frame, x.len())))
    }
}

impl CurveSystem for SectionSystem {
    fn dimension(&self) -> usize {
        self.spec.dimension
    }

    fn residual(&self, x: &Vector) -> Result<Vector> {
        let u = self.fiber_basis(x)?;
        let r = u * (self.spec.w)(x);
        let mut out = Vector::zeros(r.len() + 1);
        out.rows_mut(0, r.len()).copy_from(&r);
        out[r.len()] = 0.5 * (x.norm_squared() - 1.0);
        Ok(out)
    }

    fn jacobian(&self, x: &Vector) -> Result<Matrix> {
        let u = self.fiber_basis(x)?;
        let dw = match &self.spec.dw {
            Some(j) => j(x)?,
            None => jacobian_fd(|p| Ok((self.spec.w)(p)), x, fd_step(x))?,
        };
        let j = u * dw;
        let mut out = Matrix::zeros(j.nrows() + 1, j.ncols());
        out.rows_mut(0, j.nrows()).copy_from(&j);
        out.row_mut(j.nrows()).copy_from(&x.transpose());
        Ok(out)
    }
}

fn normal_space_basis(
    ambient: &AmbientPresentation,
    x: &Vector,
    t: &Vector,
    tol: &Tolerances,
) -> Result<Vec<Vector>> {
    let mut w = ambient.normals_at(x);
    w.push(t / t.norm());
    orthonormalize(&w, tol)
}

/// Transport `frame` into the normal space spanned at (x, t).
fn transport(
    ambient: &AmbientPresentation,
    frame: &[Vector],
    x: &Vector,
    t: &Vector,
    tol: &Tolerances,
) -> Result<Vec<Vector>> {
    let w = normal_space_basis(ambient, x, t, tol)?;
    let projected: Vec<Vector> = frame.iter().map(|f| project_out(f, &w)).collect();
    orthonormalize(&projected, tol)
}

/// The path s ↦ G₁(sθ₁)⋯G_K(sθ_K) from I to the product of the factors.
fn givens_path(factors: &[Givens], dim: usize, s: f64) -> Matrix {
    factors.iter().fold(Matrix::identity(dim, dim), |acc, g| {
        acc * g.scaled(s).matrix(dim)
    })
}

fn combine(frame: &[Vector], coeffs: &Matrix) -> Vec<Vector> {
    (0..coeffs.ncols())
        .map(|j| {
            frame
                .iter()
                .enumerate()
                .fold(Vector::zeros(frame[0].len()), |acc, (i, f)| {
                    acc + f * coeffs[(i, j)]
                })
        })
        .collect()
}

/// A closed orthonormal frame of the normal space of the curve inside M:
/// projection transport around the loop, with the holonomy undone along a
/// Givens-angle path.
pub fn transport_closed_frame(
    loop_: &SampledLoop,
    ambient: &AmbientPresentation,
    tol: &Tolerances,
) -> Result<NormalFraming> {
    let n = loop_.len();
    let (pts, tans) = (loop_.points(), loop_.tangents());
    let start = normal_space_basis(ambient, &pts[0], &tans[0], tol)?;
    let rank = loop_.dimension() - start.len();
    let mut frames = vec![complete_basis(&start, loop_.dimension())];
    if frames[0].len() != rank {
        return Err(Error::RankDeficient(
            "normal space at the start sample".into(),
        ));
    }
    for k in 1..=n {
        let next =
            transport(ambient, &frames[k - 1], &pts[k % n], &tans[k % n], tol).map_err(|e| {
                Error::RankDeficient(format!("normal space collapses at sample {}: {e}", k % n))
            })?;
        frames.push(next);
    }
    let last = frames.pop().expect("n >= 1 frames");
    let holonomy = Matrix::from_fn(rank, rank, |i, j| frames[0][i].dot(&last[j]));
    let factors = givens_factorization(&holonomy)?;
    let s0 = loop_.params()[0];
    let closing = |s: f64| givens_path(&factors, rank, (s - s0).rem_euclid(1.0)).transpose();
    let closed: Vec<Vec<Vector>> = frames
        .iter()
        .zip(loop_.params())
        .map(|(f, s)| combine(f, &closing(*s)))
        .collect();
    let fields = (0..rank)
        .map(|i| closed.iter().map(|f| f[i].clone()).collect())
        .collect();

    let source = loop_.source().cloned().map(|ls| {
        let (ambient, tol, index) = (ambient.clone(), *tol, loop_.without_source());
        let closed = closed.clone();
        Arc::new(move |s: f64| {
            let sample = ls.sample(s)?;
            let (k, f) = index.locate(s);
            let (a, b) = (&closed[k], &closed[(k + 1) % closed.len()]);
            let blend: Vec<Vector> = a
                .iter()
                .zip(b)
                .map(|(p, q)| p * (1.0 - f) + q * f)
                .collect();
            transport(&ambient, &blend, &sample.point, &sample.tangent, &tol)
        }) as Arc<dyn FramingSource>
    });
    NormalFraming::with_source(fields, source)
}

fn section_frame(spec: &SectionSpec, x: &Vector, u: &[Vector], tol: &Tolerances) -> Result<Matrix> {
    let xh = x / x.norm();
    let mut rows = vec![xh.clone(), (spec.v)(&xh)];
    let tau: Vec<Vector> = u.iter().map(|ui| spec.dw_along(x, ui)).collect();
    let sigma = min_singular_value(&rows_to_matrix(&tau));
    if !(sigma > TRANSVERSALITY_MIN) {
        return Err(Error::NonTransverse(format!(
            "dw on the normal space has singular value {sigma:.3e}"
        )));
    }
    rows.extend(tau);
    let m = orthonormalize(&rows, tol).map_err(|e| Error::NonTransverse(e.to_string()))?;
    Ok(rows_to_matrix(&m))
}

/// The loop of [x, v, dw(u)] frames.
fn section_matrix_loop(
    spec: &SectionSpec,
    loop_: &SampledLoop,
    u: &NormalFraming,
    tol: &Tolerances,
) -> Result<RotationLoop> {
    let mut samples = Vec::with_capacity(loop_.len());
    for (k, x) in loop_.points().iter().enumerate() {
        let m = section_frame(spec, x, &u.at(k), tol)?;
        if m.determinant() < 0.0 {
            return Err(Error::OrientationMismatch { sample: k });
        }
        samples.push(m);
    }
    let refiner = match (loop_.source(), u.source()) {
        (Some(ls), Some(us)) => {
            let (ls, us, spec, tol) = (ls.clone(), us.clone(), spec.clone(), *tol);
            let index = loop_.without_source();
            Some(Arc::new(move |s: f64| {
                let m = section_frame(&spec, &ls.sample(s)?.point, &us.fields(s)?, &tol)?;
                if m.determinant() < 0.0 {
                    return Err(Error::OrientationMismatch {
                        sample: index.sample_index_before(s),
                    });
                }
                Ok(m)
            }) as MatrixRefiner)
        }
        _ => None,
    };
    RotationLoop::with_params(samples, loop_.params().to_vec(), refiner)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionClasses {
    /// Class of [x, T, u].
    pub tangent_class: Z2,
    /// Class of [x, v, dw(u)].
    pub section_class: Z2,
    pub index: Z2,
    pub lift_steps: usize,
    pub refinement_depth: usize,
}

/// Index of one zero circle given an auxiliary closed frame `u` of its
/// normal space in M. Both frames must be positively oriented.
pub fn section_classes(
    spec: &SectionSpec,
    loop_: &SampledLoop,
    u: &NormalFraming,
    tol: &Tolerances,
) -> Result<SectionClasses> {
    let ambient = spec.ambient();
    let first = lift_loop(&frame_matrix_loop(loop_, u, &ambient, tol)?, tol)?;
    let second = lift_loop(&section_matrix_loop(spec, loop_, u, tol)?, tol)?;
    Ok(SectionClasses {
        tangent_class: first.class,
        section_class: second.class,
        index: first.class + second.class + Z2::ONE,
        lift_steps: first.steps + second.steps,
        refinement_depth: first.max_depth.max(second.max_depth),
    })
}

/// Orient `u` so that [x, v, dw(u)] is positive, then the traversal so that
/// [x, T, u] is positive.
pub(crate) fn oriented_component(
    spec: &SectionSpec,
    loop_: SampledLoop,
    tol: &Tolerances,
) -> Result<FramedCircle> {
    let ambient = spec.ambient();
    let mut u = transport_closed_frame(&loop_, &ambient, tol)?;
    if section_frame(spec, &loop_.points()[0], &u.at(0), tol)?.determinant() < 0.0 {
        u = u.with_negated_field(0);
    }
    FramedCircle::new(loop_, u).oriented(&ambient, tol)
}

#[derive(Debug, Clone)]
pub struct SectionReport {
    pub report: InvariantReport,
    pub curves: Vec<TracedCurve>,
    /// Oriented zero circles with their auxiliary frames.
    pub components: Vec<FramedCircle>,
}

/// κ(E): trace the zero locus of `w` and sum the component indices.
pub fn section_index(spec: &SectionSpec, opts: &TraceOptions) -> Result<SectionReport> {
    opts.validate()?;
    let tol = opts.tolerances;
    for seed in &opts.seeds {
        let x = Vector::from_row_slice(seed);
        if x.len() != spec.dimension {
            return Err(Error::DimensionMismatch {
                expected: spec.dimension,
                actual: x.len(),
            });
        }
        spec.check_at(&x)?;
    }
    let system = Arc::new(SectionSystem {
        spec: spec.clone(),
        tol,
    });
    let (curves, dropped) = trace_seeds(system, opts)?;
    let mut diagnostics = Diagnostics::new(tol);
    let mut components = Vec::with_capacity(curves.len());
    let mut reports = Vec::with_capacity(curves.len());
    for tc in &curves {
        for p in tc.loop_.points() {
            spec.check_at(p)?;
        }
        let comp = oriented_component(spec, tc.loop_.clone(), &tol)?;
        let classes = section_classes(spec, &comp.loop_, &comp.framing, &tol)?;
        diagnostics.lift_steps += classes.lift_steps;
        diagnostics.refinement_depth = diagnostics.refinement_depth.max(classes.refinement_depth);
        reports.push(ComponentReport {
            index: classes.index,
            winding_parity: None,
            samples: comp.loop_.len(),
            length: comp.loop_.length(),
            loop_classes: vec![classes.tangent_class, classes.section_class],
        });
        components.push(comp);
    }
    diagnostics.seeds_without_solution = dropped;
    diagnostics.max_residual = curves.iter().map(|c| c.max_residual).reduce(f64::max);
    let report = InvariantReport::new(reports, diagnostics)
        .with_source(format!("E over S^{}", spec.dimension - 1));
    Ok(SectionReport {
        report,
        curves,
        components,
    })
}
