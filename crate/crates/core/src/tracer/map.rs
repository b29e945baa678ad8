//! Regular-value preimages of maps to ℝⁿ or Sⁿ and their induced framings.

use std::sync::Arc;

use super::{
    hausdorff_distance, trace_component, Corrector, CurveSystem, TraceOptions, TracedCurve,
};
use crate::error::{Error, Result};
use crate::framedlink::{
    invariant_report, AmbientPresentation, FramedCircle, FramedLink, FramingSource, NormalFraming,
    SampledLoop,
};
use crate::numkit::{
    complete_basis, fd_step, jacobian_fd, least_squares, rows_to_matrix, Matrix, Tolerances, Vector,
};
use crate::report::InvariantReport;

pub type VectorMap = Arc<dyn Fn(&Vector) -> Result<Vector> + Send + Sync>;
pub type MatrixMap = Arc<dyn Fn(&Vector) -> Result<Matrix> + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// ℝⁿ with regular value `value`.
    Euclidean { value: Vector },
    /// The unit sphere Sⁿ ⊂ ℝⁿ⁺¹ with regular value `value`.
    Sphere { value: Vector },
}

impl Target {
    fn value(&self) -> &Vector {
        match self {
            Target::Euclidean { value } | Target::Sphere { value } => value,
        }
    }

    /// Dimension n of the target manifold.
    pub fn dimension(&self) -> usize {
        match self {
            Target::Euclidean { value } => value.len(),
            Target::Sphere { value } => value.len() - 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Euclidean,
    /// The evaluator is only meaningful on the unit sphere of ℝᴺ.
    UnitSphere,
}

#[derive(Clone)]
pub struct MapSpec {
    /// Ambient coordinate dimension N.
    pub dimension: usize,
    pub domain: Domain,
    pub target: Target,
    pub evaluator: VectorMap,
    pub jacobian: Option<MatrixMap>,
    /// Optional n×n rotation of the target tangent basis.
    pub basis_rotation: Option<Matrix>,
}

impl std::fmt::Debug for MapSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MapSpec")
            .field("dimension", &self.dimension)
            .field("domain", &self.domain)
            .field("target", &self.target)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl MapSpec {
    pub fn new(dimension: usize, domain: Domain, target: Target, evaluator: VectorMap) -> Self {
        MapSpec {
            dimension,
            domain,
            target,
            evaluator,
            jacobian: None,
            basis_rotation: None,
        }
    }

    pub fn with_jacobian(mut self, jacobian: MatrixMap) -> Self {
        self.jacobian = Some(jacobian);
        self
    }

    pub fn with_basis_rotation(mut self, rotation: Matrix) -> Self {
        self.basis_rotation = Some(rotation);
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.target.dimension();
        let rows = n + usize::from(self.domain == Domain::UnitSphere);
        if rows + 1 != self.dimension {
            return Err(Error::validation(
                "one-dimensional preimage",
                format!("{rows} equations in dimension {}", self.dimension),
            ));
        }
        if let Target::Sphere { value } = &self.target {
            if (value.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::validation(
                    "regular value on the unit sphere",
                    format!("|x0| = {}", value.norm()),
                ));
            }
        }
        if let Some(q) = &self.basis_rotation {
            if q.nrows() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: q.nrows(),
                });
            }
        }
        Ok(())
    }

    /// Orthonormal basis of the target tangent space at the regular value,
    /// as the columns of a matrix.
    fn target_basis(&self) -> Matrix {
        let b = match &self.target {
            Target::Euclidean { value } => Matrix::identity(value.len(), value.len()),
            Target::Sphere { value } => {
                let extra = complete_basis(std::slice::from_ref(value), value.len());
                rows_to_matrix(&extra).transpose()
            }
        };
        match &self.basis_rotation {
            Some(q) => b * q,
            None => b,
        }
    }
}

/// The constrained residual of a map near its regular value.
pub(crate) struct MapSystem {
    spec: MapSpec,
    basis_t: Matrix,
}

impl MapSystem {
    pub(crate) fn new(spec: MapSpec) -> Result<Self> {
        spec.validate()?;
        let basis_t = spec.target_basis().transpose();
        Ok(MapSystem { spec, basis_t })
    }

    fn on_sphere(&self) -> bool {
        self.spec.domain == Domain::UnitSphere
    }
}

impl CurveSystem for MapSystem {
    fn dimension(&self) -> usize {
        self.spec.dimension
    }

    fn residual(&self, x: &Vector) -> Result<Vector> {
        let f = (self.spec.evaluator)(x)?;
        let y0 = self.spec.target.value();
        if let Target::Sphere { value } = &self.spec.target {
            if f.dot(value) <= 0.0 {
                return Err(Error::NoConvergence(
                    "iterate maps to the far hemisphere".into(),
                ));
            }
        }
        let r = &self.basis_t * (f - y0);
        if !self.on_sphere() {
            return Ok(r);
        }
        let mut out = Vector::zeros(r.len() + 1);
        out.rows_mut(0, r.len()).copy_from(&r);
        out[r.len()] = 0.5 * (x.norm_squared() - 1.0);
        Ok(out)
    }

    fn jacobian(&self, x: &Vector) -> Result<Matrix> {
        let jf = match &self.spec.jacobian {
            Some(j) => j(x)?,
            None => jacobian_fd(|p| (self.spec.evaluator)(p), x, fd_step(x))?,
        };
        let j = &self.basis_t * jf;
        if !self.on_sphere() {
            return Ok(j);
        }
        let mut out = Matrix::zeros(j.nrows() + 1, j.ncols());
        out.rows_mut(0, j.nrows()).copy_from(&j);
        out.row_mut(j.nrows()).copy_from(&x.transpose());
        Ok(out)
    }
}

fn framing_at(system: &MapSystem, x: &Vector, tol: &Tolerances) -> Result<Vec<Vector>> {
    let j = system.jacobian(x)?;
    let n = system.spec.target.dimension();
    (0..n)
        .map(|i| {
            let mut rhs = Vector::zeros(j.nrows());
            rhs[i] = 1.0;
            least_squares(&j, &rhs, tol).map_err(|e| Error::Singular(e.to_string()))
        })
        .collect()
}

fn induced_framing_with(
    system: Arc<MapSystem>,
    loop_: &SampledLoop,
    tol: &Tolerances,
) -> Result<NormalFraming> {
    let per_sample = loop_
        .points()
        .iter()
        .map(|x| framing_at(&system, x, tol))
        .collect::<Result<Vec<_>>>()?;
    let k = system.spec.target.dimension();
    let fields = (0..k)
        .map(|i| per_sample.iter().map(|f| f[i].clone()).collect())
        .collect();
    let source = loop_.source().cloned().map(|ls| {
        let tol = *tol;
        Arc::new(move |s: f64| framing_at(&system, &ls.sample(s)?.point, &tol))
            as Arc<dyn FramingSource>
    });
    NormalFraming::with_source(fields, source)
}

/// The framing pulled back through the derivative: φᵢ is the minimum-norm
/// solution of J·φᵢ = bᵢ for the target basis b.
pub fn induced_framing(
    spec: &MapSpec,
    loop_: &SampledLoop,
    tol: &Tolerances,
) -> Result<NormalFraming> {
    induced_framing_with(Arc::new(MapSystem::new(spec.clone())?), loop_, tol)
}

/// A traced preimage together with its report.
#[derive(Debug, Clone)]
pub struct MapReport {
    pub report: InvariantReport,
    pub link: FramedLink,
    pub curves: Vec<TracedCurve>,
}

/// Trace every seed; seeds without a nearby solution are dropped and listed
/// in the diagnostics.
pub(crate) fn trace_seeds(
    system: Arc<dyn CurveSystem>,
    opts: &TraceOptions,
) -> Result<(Vec<TracedCurve>, Vec<usize>)> {
    let mut curves: Vec<(usize, TracedCurve)> = Vec::new();
    let mut dropped = Vec::new();
    let corrector = Corrector::new(system.clone(), opts.tolerances);
    for (i, seed) in opts.seeds.iter().enumerate() {
        let seed = Vector::from_row_slice(seed);
        match trace_component(system.clone(), &seed, opts) {
            Ok(tc) => {
                for (j, other) in &curves {
                    let d = hausdorff_distance(&other.loop_, &tc.loop_, &corrector);
                    if d <= 10.0 * opts.tolerances.closure_tol {
                        return Err(Error::DuplicateComponent {
                            first: *j,
                            second: i,
                        });
                    }
                }
                curves.push((i, tc));
            }
            Err(Error::NoConvergence(_)) => dropped.push(i),
            Err(e) => return Err(e),
        }
    }
    Ok((curves.into_iter().map(|(_, c)| c).collect(), dropped))
}

/// κ of a map: trace the preimage of the regular value, frame it by the
/// derivative and sum the indices.
pub fn kappa_of_map(
    spec: &MapSpec,
    opts: &TraceOptions,
    ambient: &AmbientPresentation,
) -> Result<MapReport> {
    let tol = opts.tolerances;
    let system = Arc::new(MapSystem::new(spec.clone())?);
    if ambient.dimension() != spec.dimension {
        return Err(Error::AmbientMismatch(format!(
            "map on R^{} traced in {}",
            spec.dimension,
            ambient.label()
        )));
    }
    let (curves, dropped) = trace_seeds(system.clone(), opts)?;
    let mut components = Vec::with_capacity(curves.len());
    for tc in &curves {
        let framing = induced_framing_with(system.clone(), &tc.loop_, &tol)?;
        components.push(FramedCircle::new(tc.loop_.clone(), framing).oriented(ambient, &tol)?);
    }
    let link = FramedLink::new(ambient.clone(), components, &tol)?;
    let mut report = invariant_report(&link, &tol)?;
    report.diagnostics.seeds_without_solution = dropped;
    report.diagnostics.max_residual = curves.iter().map(|c| c.max_residual).reduce(f64::max);
    Ok(MapReport {
        report,
        link,
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framedlink::index_of_circle;
    use crate::numkit::Givens;
    use crate::z2::Z2;

    fn quadric() -> MapSpec {
        MapSpec::new(
            4,
            Domain::Euclidean,
            Target::Euclidean {
                value: Vector::zeros(3),
            },
            Arc::new(|x: &Vector| {
                Ok(Vector::from_row_slice(&[
                    x[0] * x[0] + x[1] * x[1] - 1.0,
                    x[2],
                    x[3],
                ]))
            }),
        )
    }

    fn opts(seeds: Vec<Vec<f64>>) -> TraceOptions {
        TraceOptions::with_seeds(seeds)
    }

    #[test]
    fn quadric_framing_closed_form() {
        // J = [[2x₁, 2x₂, 0, 0], [0,0,1,0], [0,0,0,1]] gives φ = (x/2, e₃, e₄).
        let spec = quadric();
        let system: Arc<dyn CurveSystem> = Arc::new(MapSystem::new(spec.clone()).unwrap());
        let tc = trace_component(
            system,
            &Vector::from_row_slice(&[1.1, 0.0, 0.05, -0.02]),
            &opts(vec![]),
        )
        .unwrap();
        assert!(tc.closure_error < 1e-8);
        let f = induced_framing(&spec, &tc.loop_, &Tolerances::default()).unwrap();
        for (k, x) in tc.loop_.points().iter().enumerate() {
            let expected = [
                x * 0.5,
                Vector::from_row_slice(&[0., 0., 1., 0.]),
                Vector::from_row_slice(&[0., 0., 0., 1.]),
            ];
            for (i, e) in expected.iter().enumerate() {
                assert!((&f.fields()[i][k] - e).norm() < 1e-8);
            }
            assert!(f.fields()[0][k].dot(&tc.loop_.tangents()[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn quadric_kappa_and_basis_rotation() {
        let amb = AmbientPresentation::euclidean(4);
        let o = opts(vec![vec![1.1, 0.0, 0.05, -0.02]]);
        let r = kappa_of_map(&quadric(), &o, &amb).unwrap();
        assert_eq!(r.report.kappa, Z2::ZERO);
        assert_eq!(r.report.delta, Some(Z2::ZERO));
        let q = Givens {
            a: 0,
            b: 2,
            angle: 1.0,
        }
        .matrix(3);
        let rotated = kappa_of_map(&quadric().with_basis_rotation(q), &o, &amb).unwrap();
        assert_eq!(rotated.report.kappa, Z2::ZERO);
        let c = &rotated.link.components()[0];
        assert_eq!(
            index_of_circle(&c.loop_, &c.framing, &amb, &Tolerances::default()).unwrap(),
            Z2::ZERO
        );
    }

    #[test]
    fn empty_preimage_and_duplicates() {
        let amb = AmbientPresentation::euclidean(4);
        let r = kappa_of_map(&quadric(), &opts(vec![vec![5.0, 5.0, 5.0, 5.0]]), &amb).unwrap();
        assert!(r.link.is_empty());
        assert_eq!(r.report.kappa, Z2::ZERO);
        assert_eq!(r.report.diagnostics.seeds_without_solution, vec![0]);
        let dup = kappa_of_map(
            &quadric(),
            &opts(vec![vec![1.0, 0.0, 0.0, 0.0], vec![-1.0, 0.1, 0.0, 0.0]]),
            &amb,
        );
        assert!(matches!(
            dup,
            Err(Error::DuplicateComponent {
                first: 0,
                second: 1
            })
        ));
    }

    #[test]
    fn rejects_wrong_equation_count() {
        let mut spec = quadric();
        spec.dimension = 5;
        assert!(MapSystem::new(spec).is_err());
    }
}
