//! Tracing 1-dimensional solution sets and the framings they carry.
//!
//! A [`CurveSystem`] is N−1 equations in ℝᴺ whose zero set is a union of
//! circles. Regular-value preimages ([`MapSpec`]) and section zero loci
//! ([`SectionSpec`]) both reduce to one.

mod map;
mod section;

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use map::{induced_framing, kappa_of_map, Domain, MapReport, MapSpec, Target, VectorMap};
pub use section::{
    section_classes, section_index, transport_closed_frame, SectionClasses, SectionReport,
    SectionSpec, TangentField,
};

use crate::error::{Error, Result};
use crate::framedlink::{LoopSample, LoopSource, SampledLoop, MIN_SAMPLES};
use crate::numkit::{kernel_direction, least_squares, Matrix, Tolerances, Vector};

/// Smallest singular value accepted for a transverse Jacobian.
pub const TRANSVERSALITY_MIN: f64 = 1e-6;

/// N−1 equations on ℝᴺ with a transverse 1-dimensional zero set.
pub trait CurveSystem: Send + Sync {
    fn dimension(&self) -> usize;
    fn residual(&self, x: &Vector) -> Result<Vector>;
    fn jacobian(&self, x: &Vector) -> Result<Matrix>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub seeds: Vec<Vec<f64>>,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Seeds whose Newton correction moves farther than this have no nearby
    /// solution.
    pub seed_radius: f64,
    pub tolerances: Tolerances,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            seeds: Vec::new(),
            initial_step: 0.05,
            min_step: 1e-5,
            max_step: 0.1,
            max_steps: 4000,
            seed_radius: 1.0,
            tolerances: Tolerances::default(),
        }
    }
}

impl TraceOptions {
    pub fn with_seeds(seeds: Vec<Vec<f64>>) -> Self {
        TraceOptions {
            seeds,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        if !(0.0 < self.min_step
            && self.min_step <= self.initial_step
            && self.initial_step <= self.max_step)
        {
            return Err(Error::validation(
                "0 < min step <= initial step <= max step",
                format!(
                    "{} / {} / {}",
                    self.min_step, self.initial_step, self.max_step
                ),
            ));
        }
        if self.max_steps < 64 {
            return Err(Error::validation(
                "max steps >= 64",
                format!("{}", self.max_steps),
            ));
        }
        if !(self.seed_radius > 0.0) {
            return Err(Error::validation(
                "positive seed radius",
                format!("{}", self.seed_radius),
            ));
        }
        Ok(())
    }

    /// Same options with all step sizes scaled.
    pub fn scaled_steps(&self, factor: f64) -> Self {
        TraceOptions {
            initial_step: self.initial_step * factor,
            min_step: self.min_step * factor,
            max_step: self.max_step * factor,
            max_steps: (self.max_steps as f64 / factor).ceil() as usize,
            ..self.clone()
        }
    }
}

/// Newton projection onto the zero set and tangents along it.
#[derive(Clone)]
pub struct Corrector {
    system: Arc<dyn CurveSystem>,
    tol: Tolerances,
}

impl Corrector {
    pub fn new(system: Arc<dyn CurveSystem>, tol: Tolerances) -> Self {
        Corrector { system, tol }
    }

    pub fn system(&self) -> &Arc<dyn CurveSystem> {
        &self.system
    }

    pub fn residual_norm(&self, x: &Vector) -> Result<f64> {
        Ok(self.system.residual(x)?.norm())
    }

    /// Minimum-norm Newton iteration; returns the solution and the number of
    /// iterations used.
    pub fn correct(&self, start: &Vector, max_iter: usize) -> Result<(Vector, usize)> {
        let mut x = start.clone();
        for it in 0..=max_iter {
            let r = self.system.residual(&x)?;
            let norm = r.norm();
            if !norm.is_finite() {
                return Err(Error::NoConvergence(format!(
                    "residual not finite after {it} iterations"
                )));
            }
            if norm < self.tol.newton_tol {
                return Ok((x, it));
            }
            if it == max_iter {
                break;
            }
            let j = self.system.jacobian(&x)?;
            let dx = least_squares(&j, &r, &self.tol)
                .map_err(|e| Error::NoConvergence(format!("Newton step failed: {e}")))?;
            x -= dx;
        }
        Err(Error::NoConvergence(format!(
            "residual above {:.1e} after {max_iter} Newton iterations",
            self.tol.newton_tol
        )))
    }

    /// Unit tangent at a point of the zero set, oriented along `previous`.
    pub fn tangent(&self, x: &Vector, previous: Option<&Vector>) -> Result<Vector> {
        let j = self.system.jacobian(x)?;
        let sigma = min_singular_value(&j);
        if !(sigma > TRANSVERSALITY_MIN) {
            return Err(Error::Singular(format!(
                "smallest singular value {sigma:.3e}"
            )));
        }
        kernel_direction(&j, previous, &self.tol).map_err(|e| Error::Singular(e.to_string()))
    }

    /// Orthogonal foot of `p` on the branch through `near`.
    pub fn foot_point(&self, p: &Vector, near: &Vector, tangent: &Vector) -> Vector {
        let mut y = near.clone();
        let mut t = tangent / tangent.norm();
        for _ in 0..6 {
            let pred = &y + &t * (p - &y).dot(&t);
            let Ok((next, _)) = self.correct(&pred, 12) else {
                break;
            };
            let shift = (&next - &y).norm();
            y = next;
            match self.tangent(&y, Some(&t)) {
                Ok(tn) => t = tn,
                Err(_) => break,
            }
            if shift < 1e-13 {
                break;
            }
        }
        y
    }
}

pub(crate) fn min_singular_value(j: &Matrix) -> f64 {
    j.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// A traced closed curve with its quality figures.
#[derive(Debug, Clone)]
pub struct TracedCurve {
    /// Resamplable through the corrector.
    pub loop_: SampledLoop,
    pub closure_error: f64,
    pub max_residual: f64,
    /// ⟨t_end, t_start⟩ at the closing point.
    pub closing_alignment: f64,
    pub steps: usize,
}

struct TraceSource {
    points: Vec<Vector>,
    tangents: Vec<Vector>,
    params: Vec<f64>,
    corrector: Corrector,
}

impl LoopSource for TraceSource {
    fn sample(&self, s: f64) -> Result<LoopSample> {
        let s = s.rem_euclid(1.0);
        let n = self.points.len();
        let k = self.params.partition_point(|p| *p <= s).saturating_sub(1);
        let next = if k + 1 < n { self.params[k + 1] } else { 1.0 };
        let f = (s - self.params[k]) / (next - self.params[k]);
        let (a, b) = (&self.points[k], &self.points[(k + 1) % n]);
        let guess = a * (1.0 - f) + b * f;
        let t_guess = &self.tangents[k] * (1.0 - f) + &self.tangents[(k + 1) % n] * f;
        let (point, _) = self.corrector.correct(&guess, 20)?;
        let tangent = self.corrector.tangent(&point, Some(&t_guess))?;
        Ok(LoopSample { point, tangent })
    }
}

fn chord_params(points: &[Vector]) -> Vec<f64> {
    let n = points.len();
    let lens: Vec<f64> = (0..n)
        .map(|k| (&points[(k + 1) % n] - &points[k]).norm())
        .collect();
    let total: f64 = lens.iter().sum();
    let mut acc = 0.0;
    lens.iter()
        .map(|l| {
            let s = acc / total;
            acc += l;
            s
        })
        .collect()
}

/// Follow the zero set from `seed` until the curve closes.
pub fn trace_component(
    system: Arc<dyn CurveSystem>,
    seed: &Vector,
    opts: &TraceOptions,
) -> Result<TracedCurve> {
    opts.validate()?;
    if seed.len() != system.dimension() {
        return Err(Error::DimensionMismatch {
            expected: system.dimension(),
            actual: seed.len(),
        });
    }
    let tol = opts.tolerances;
    let corrector = Corrector::new(system, tol);
    let (x0, _) = corrector.correct(seed, 30)?;
    let moved = (&x0 - seed).norm();
    if moved > opts.seed_radius {
        return Err(Error::NoConvergence(format!(
            "nearest solution is {moved:.3} from the seed"
        )));
    }
    let t0 = corrector.tangent(&x0, None)?;

    let mut points = vec![x0.clone()];
    let mut tangents = vec![t0.clone()];
    let (mut x, mut t) = (x0.clone(), t0.clone());
    let mut h = opts.initial_step;
    let mut travelled = 0.0;
    let mut closed = None;

    for step in 0..opts.max_steps {
        let gap = &x0 - &x;
        if travelled > 4.0 * opts.max_step && gap.norm() <= 1.5 * h && gap.dot(&t) > 0.0 {
            if let Some((err, align)) = try_close(&corrector, &x, &t, &x0, &t0, tol.closure_tol) {
                if align > 0.99 {
                    if gap.norm() < 0.25 * h && points.len() > 1 {
                        points.pop();
                        tangents.pop();
                    }
                    closed = Some((err, align, step));
                    break;
                }
            }
        }
        let pred = &x + &t * h;
        let accepted = corrector.correct(&pred, 8).and_then(|(xn, iters)| {
            let jump = (&xn - &pred).norm();
            let advance = (&xn - &x).norm();
            if jump > 0.5 * h || advance < 0.25 * h {
                return Err(Error::NoConvergence("corrector left the branch".into()));
            }
            let tn = corrector.tangent(&xn, Some(&t))?;
            if tn.dot(&t) < 0.5 {
                return Err(Error::NoConvergence("tangent turned too far".into()));
            }
            Ok((xn, tn, iters))
        });
        match accepted {
            Ok((xn, tn, iters)) => {
                travelled += (&xn - &x).norm();
                x = xn;
                t = tn;
                points.push(x.clone());
                tangents.push(t.clone());
                if iters <= 2 {
                    h = (2.0 * h).min(opts.max_step);
                }
            }
            Err(Error::Singular(msg)) => return Err(Error::Singular(msg)),
            Err(_) => {
                h *= 0.5;
                if h < opts.min_step {
                    return Err(Error::Singular(format!(
                        "step size fell below {:.1e} near {:?}",
                        opts.min_step,
                        x.as_slice()
                    )));
                }
            }
        }
    }
    let Some((closure_error, closing_alignment, steps)) = closed else {
        return Err(Error::NotClosed {
            steps: opts.max_steps,
        });
    };

    let params = chord_params(&points);
    let source = Arc::new(TraceSource {
        points: points.clone(),
        tangents: tangents.clone(),
        params: params.clone(),
        corrector: corrector.clone(),
    });
    let loop_ = if points.len() < MIN_SAMPLES {
        let factor = MIN_SAMPLES.div_ceil(points.len());
        let fine: Vec<f64> = (0..params.len())
            .flat_map(|k| {
                let next = params.get(k + 1).copied().unwrap_or(1.0);
                let a = params[k];
                (0..factor).map(move |j| a + (next - a) * j as f64 / factor as f64)
            })
            .collect();
        let samples = fine
            .iter()
            .map(|s| source.sample(*s))
            .collect::<Result<Vec<_>>>()?;
        let (pts, tans) = samples.into_iter().map(|s| (s.point, s.tangent)).unzip();
        SampledLoop::from_parts(pts, tans, fine, Some(source))?
    } else {
        SampledLoop::from_parts(points, tangents, params, Some(source))?
    };
    let max_residual = loop_
        .points()
        .iter()
        .map(|p| corrector.residual_norm(p))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(TracedCurve {
        loop_,
        closure_error,
        max_residual,
        closing_alignment,
        steps,
    })
}

/// Walk from `x` onto `x0` along the curve; returns the landing error and
/// the tangent alignment there.
fn try_close(
    corrector: &Corrector,
    x: &Vector,
    t: &Vector,
    x0: &Vector,
    t0: &Vector,
    closure_tol: f64,
) -> Option<(f64, f64)> {
    let (mut y, mut ty) = (x.clone(), t.clone());
    for _ in 0..8 {
        let pred = &y + &ty * (x0 - &y).dot(&ty);
        y = corrector.correct(&pred, 12).ok()?.0;
        ty = corrector.tangent(&y, Some(&ty)).ok()?;
        let err = (&y - x0).norm();
        if err < closure_tol {
            return Some((err, ty.dot(t0)));
        }
    }
    None
}

/// Largest distance from a sample of `a` to the curve of `b`, the curve
/// being reached through the corrector.
pub fn directed_distance(a: &SampledLoop, b: &SampledLoop, corrector: &Corrector) -> f64 {
    a.points()
        .iter()
        .map(|p| {
            let (k, _) = b
                .points()
                .iter()
                .enumerate()
                .map(|(k, q)| (k, (p - q).norm()))
                .fold(
                    (0, f64::INFINITY),
                    |best, c| if c.1 < best.1 { c } else { best },
                );
            let foot = corrector.foot_point(p, &b.points()[k], &b.tangents()[k]);
            (p - foot).norm()
        })
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between two traced curves of one system.
pub fn hausdorff_distance(a: &SampledLoop, b: &SampledLoop, corrector: &Corrector) -> f64 {
    directed_distance(a, b, corrector).max(directed_distance(b, a, corrector))
}

/// One row per sample: parameter, then coordinates.
pub fn loop_csv(loop_: &SampledLoop) -> String {
    let mut out = String::from("s");
    for i in 0..loop_.dimension() {
        let _ = write!(out, ",x{}", i + 1);
    }
    out.push('\n');
    for (s, p) in loop_.params().iter().zip(loop_.points()) {
        let _ = write!(out, "{s:.12}");
        for c in p.iter() {
            let _ = write!(out, ",{c:.12}");
        }
        out.push('\n');
    }
    out
}
