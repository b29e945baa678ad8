//! Sampled closed curves and framings along them.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numkit::{Matrix, Vector};

/// Minimum number of samples on a loop.
pub const MIN_SAMPLES: usize = 16;

/// A point of a loop together with a (not necessarily unit) tangent pointing
/// in the direction of increasing parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopSample {
    pub point: Vector,
    pub tangent: Vector,
}

/// Evaluates a loop at any parameter in `[0, 1)`.
pub trait LoopSource: Send + Sync {
    fn sample(&self, s: f64) -> Result<LoopSample>;
}

impl<F> LoopSource for F
where
    F: Fn(f64) -> Result<LoopSample> + Send + Sync,
{
    fn sample(&self, s: f64) -> Result<LoopSample> {
        self(s)
    }
}

/// Evaluates the framing fields at any loop parameter in `[0, 1)`.
pub trait FramingSource: Send + Sync {
    fn fields(&self, s: f64) -> Result<Vec<Vector>>;
}

impl<F> FramingSource for F
where
    F: Fn(f64) -> Result<Vec<Vector>> + Send + Sync,
{
    fn fields(&self, s: f64) -> Result<Vec<Vector>> {
        self(s)
    }
}

/// Parameters of a cyclic sample list, unwrapped so that each exceeds its
/// predecessor.
fn unwrapped(params: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(params.len());
    for &s in params {
        let mut s = s;
        if let Some(&prev) = out.last() {
            while s <= prev {
                s += 1.0;
            }
        }
        out.push(s);
    }
    out
}

/// Insert `factor - 1` evenly spaced parameters between consecutive ones.
fn subdivide(params: &[f64], factor: usize) -> Vec<f64> {
    let u = unwrapped(params);
    let n = u.len();
    let mut out = Vec::with_capacity(n * factor);
    for k in 0..n {
        let a = u[k];
        let b = if k + 1 < n {
            u[k + 1]
        } else {
            u[0] + (u[n - 1] - u[0]).floor() + 1.0
        };
        for j in 0..factor {
            out.push((a + (b - a) * j as f64 / factor as f64).rem_euclid(1.0));
        }
    }
    out
}

/// A closed curve in ℝᴺ as a cyclic list of samples.
#[derive(Clone)]
pub struct SampledLoop {
    points: Vec<Vector>,
    tangents: Vec<Vector>,
    params: Vec<f64>,
    source: Option<Arc<dyn LoopSource>>,
}

impl std::fmt::Debug for SampledLoop {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampledLoop")
            .field("samples", &self.points.len())
            .field("dimension", &self.dimension())
            .field("source", &self.source.is_some())
            .finish()
    }
}

impl SampledLoop {
    /// A loop known only through its samples. Tangents are central
    /// differences and parameters are polygonal arc-length fractions.
    pub fn from_points(points: Vec<Vector>) -> Result<Self> {
        validate_points(&points)?;
        let n = points.len();
        let tangents = (0..n)
            .map(|k| &points[(k + 1) % n] - &points[(k + n - 1) % n])
            .collect();
        let mut params = Vec::with_capacity(n);
        let mut acc = 0.0;
        let total = polygon_length(&points);
        for k in 0..n {
            params.push(acc / total);
            acc += (&points[(k + 1) % n] - &points[k]).norm();
        }
        Ok(SampledLoop {
            points,
            tangents,
            params,
            source: None,
        })
    }

    /// A loop sampled at `n` uniform parameters from an analytic source,
    /// which is kept for later refinement.
    pub fn from_source(source: Arc<dyn LoopSource>, n: usize) -> Result<Self> {
        let params: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
        Self::sampled_at(source, params)
    }

    pub(crate) fn sampled_at(source: Arc<dyn LoopSource>, params: Vec<f64>) -> Result<Self> {
        let samples = params
            .iter()
            .map(|s| source.sample(*s))
            .collect::<Result<Vec<_>>>()?;
        let (points, tangents) = samples.into_iter().map(|s| (s.point, s.tangent)).unzip();
        Self::from_parts(points, tangents, params, Some(source))
    }

    pub fn from_parts(
        points: Vec<Vector>,
        tangents: Vec<Vector>,
        params: Vec<f64>,
        source: Option<Arc<dyn LoopSource>>,
    ) -> Result<Self> {
        validate_points(&points)?;
        if tangents.len() != points.len() || params.len() != points.len() {
            return Err(Error::validation(
                "aligned loop data",
                "points, tangents and params differ in length",
            ));
        }
        Ok(SampledLoop {
            points,
            tangents,
            params,
            source,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn tangents(&self) -> &[Vector] {
        &self.tangents
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn source(&self) -> Option<&Arc<dyn LoopSource>> {
        self.source.as_ref()
    }

    pub fn length(&self) -> f64 {
        polygon_length(&self.points)
    }

    pub fn without_source(&self) -> Self {
        SampledLoop {
            source: None,
            ..self.clone()
        }
    }

    /// The sample interval containing parameter `s` and the fraction of the
    /// way through it.
    pub(crate) fn locate(&self, s: f64) -> (usize, f64) {
        let u = unwrapped(&self.params);
        let n = u.len();
        let base = u[0];
        let mut t = s;
        while t < base {
            t += 1.0;
        }
        while t >= base + 1.0 {
            t -= 1.0;
        }
        let k = u.iter().rposition(|p| *p <= t).unwrap_or(0);
        let next = if k + 1 < n { u[k + 1] } else { base + 1.0 };
        (k, (t - u[k]) / (next - u[k]))
    }

    /// Index of the sample whose parameter interval contains `s`.
    pub(crate) fn sample_index_before(&self, s: f64) -> usize {
        self.locate(s).0
    }

    /// Start the cyclic list at sample `k`.
    pub fn cyclic_shift(&self, k: usize) -> Self {
        let n = self.len();
        let k = k % n;
        let rot =
            |v: &[Vector]| -> Vec<Vector> { (0..n).map(|j| v[(j + k) % n].clone()).collect() };
        SampledLoop {
            points: rot(&self.points),
            tangents: rot(&self.tangents),
            params: (0..n).map(|j| self.params[(j + k) % n]).collect(),
            source: self.source.clone(),
        }
    }

    /// Resample with `factor` times as many samples; needs a source.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let source = self.source.clone().ok_or_else(|| {
            Error::validation(
                "loop source",
                "refinement needs an analytic or traced source",
            )
        })?;
        Self::sampled_at(source, subdivide(&self.params, factor.max(1)))
    }

    /// Traverse the loop backwards, keeping sample 0 in place.
    pub fn reversed(&self) -> Self {
        let n = self.len();
        let idx = |j: usize| (n - j) % n;
        let source = self.source.clone().map(|src| {
            Arc::new(move |s: f64| {
                let LoopSample { point, tangent } = src.sample((-s).rem_euclid(1.0))?;
                Ok(LoopSample {
                    point,
                    tangent: -tangent,
                })
            }) as Arc<dyn LoopSource>
        });
        SampledLoop {
            points: (0..n).map(|j| self.points[idx(j)].clone()).collect(),
            tangents: (0..n).map(|j| -&self.tangents[idx(j)]).collect(),
            params: (0..n)
                .map(|j| (-self.params[idx(j)]).rem_euclid(1.0))
                .collect(),
            source,
        }
    }

    /// Apply a fixed linear map (normally special orthogonal) to the loop.
    pub fn transformed(&self, p: &Matrix) -> Self {
        let source = self.source.clone().map(|src| {
            let p = p.clone();
            Arc::new(move |s: f64| {
                let LoopSample { point, tangent } = src.sample(s)?;
                Ok(LoopSample {
                    point: &p * point,
                    tangent: &p * tangent,
                })
            }) as Arc<dyn LoopSource>
        });
        SampledLoop {
            points: self.points.iter().map(|x| p * x).collect(),
            tangents: self.tangents.iter().map(|t| p * t).collect(),
            params: self.params.clone(),
            source,
        }
    }

    /// Translate every point by `offset`.
    pub fn translated(&self, offset: &Vector) -> Self {
        let source = self.source.clone().map(|src| {
            let offset = offset.clone();
            Arc::new(move |s: f64| {
                let LoopSample { point, tangent } = src.sample(s)?;
                Ok(LoopSample {
                    point: point + &offset,
                    tangent,
                })
            }) as Arc<dyn LoopSource>
        });
        SampledLoop {
            points: self.points.iter().map(|x| x + offset).collect(),
            tangents: self.tangents.clone(),
            params: self.params.clone(),
            source,
        }
    }

    /// Winding number of the projection to the coordinate plane `(a, b)`
    /// around the origin.
    pub fn winding_number(&self, a: usize, b: usize) -> i64 {
        let n = self.len();
        let mut total = 0.0;
        for k in 0..n {
            let p = &self.points[k];
            let q = &self.points[(k + 1) % n];
            let mut d = q[b].atan2(q[a]) - p[b].atan2(p[a]);
            while d > PI {
                d -= 2.0 * PI;
            }
            while d <= -PI {
                d += 2.0 * PI;
            }
            total += d;
        }
        (total / (2.0 * PI)).round() as i64
    }
}

fn polygon_length(points: &[Vector]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|k| (&points[(k + 1) % n] - &points[k]).norm())
        .sum()
}

fn validate_points(points: &[Vector]) -> Result<()> {
    if points.len() < MIN_SAMPLES {
        return Err(Error::validation(
            "at least 16 samples",
            format!("loop has {} samples", points.len()),
        ));
    }
    let dim = points[0].len();
    let n = points.len();
    for (k, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: p.len(),
            });
        }
        if p.iter().any(|c| !c.is_finite()) {
            return Err(Error::validation(
                "finite coordinates",
                format!("sample {k}"),
            ));
        }
        if (&points[(k + 1) % n] - p).norm() == 0.0 {
            return Err(Error::validation(
                "consecutive points distinct",
                format!("samples {k} and {} coincide", (k + 1) % n),
            ));
        }
    }
    let len = polygon_length(points);
    if !(len.is_finite() && len > 0.0) {
        return Err(Error::validation(
            "positive finite length",
            format!("length {len}"),
        ));
    }
    Ok(())
}

/// k vector fields along a loop, stored field-major: `fields[i][sample]`.
#[derive(Clone)]
pub struct NormalFraming {
    fields: Vec<Vec<Vector>>,
    source: Option<Arc<dyn FramingSource>>,
}

impl std::fmt::Debug for NormalFraming {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NormalFraming")
            .field("fields", &self.fields.len())
            .field("samples", &self.samples())
            .field("source", &self.source.is_some())
            .finish()
    }
}

impl NormalFraming {
    pub fn new(fields: Vec<Vec<Vector>>) -> Result<Self> {
        Self::with_source(fields, None)
    }

    pub fn with_source(
        fields: Vec<Vec<Vector>>,
        source: Option<Arc<dyn FramingSource>>,
    ) -> Result<Self> {
        if let Some(first) = fields.first() {
            if fields.iter().any(|f| f.len() != first.len()) {
                return Err(Error::validation(
                    "aligned framing fields",
                    "fields have different sample counts",
                ));
            }
        }
        Ok(NormalFraming { fields, source })
    }

    /// Evaluate a framing source at every parameter of `loop_`.
    pub fn from_source(source: Arc<dyn FramingSource>, loop_: &SampledLoop) -> Result<Self> {
        Self::sampled_at(source, loop_.params())
    }

    fn sampled_at(source: Arc<dyn FramingSource>, params: &[f64]) -> Result<Self> {
        let per_sample = params
            .iter()
            .map(|s| source.fields(*s))
            .collect::<Result<Vec<_>>>()?;
        let k = per_sample.first().map_or(0, |f| f.len());
        let mut fields = vec![Vec::with_capacity(params.len()); k];
        for sample in per_sample {
            if sample.len() != k {
                return Err(Error::validation(
                    "constant framing field count",
                    format!("expected {k} fields, got {}", sample.len()),
                ));
            }
            for (i, f) in sample.into_iter().enumerate() {
                fields[i].push(f);
            }
        }
        Ok(NormalFraming {
            fields,
            source: Some(source),
        })
    }

    pub fn count(&self) -> usize {
        self.fields.len()
    }

    pub fn samples(&self) -> usize {
        self.fields.first().map_or(0, |f| f.len())
    }

    pub fn fields(&self) -> &[Vec<Vector>] {
        &self.fields
    }

    /// All field vectors at one sample.
    pub fn at(&self, sample: usize) -> Vec<Vector> {
        self.fields.iter().map(|f| f[sample].clone()).collect()
    }

    pub fn source(&self) -> Option<&Arc<dyn FramingSource>> {
        self.source.as_ref()
    }

    pub fn without_source(&self) -> Self {
        NormalFraming {
            fields: self.fields.clone(),
            source: None,
        }
    }

    pub fn cyclic_shift(&self, k: usize) -> Self {
        let n = self.samples();
        NormalFraming {
            fields: self
                .fields
                .iter()
                .map(|f| (0..n).map(|j| f[(j + k) % n].clone()).collect())
                .collect(),
            source: self.source.clone(),
        }
    }

    /// Re-evaluate the source at the parameters of a refined loop.
    pub fn resampled_on(&self, loop_: &SampledLoop) -> Result<Self> {
        let source = self.source.clone().ok_or_else(|| {
            Error::validation("framing source", "resampling needs a framing source")
        })?;
        Self::sampled_at(source, loop_.params())
    }

    /// Companion of [`SampledLoop::reversed`].
    pub fn reversed(&self) -> Self {
        let n = self.samples();
        let source = self.source.clone().map(|src| {
            Arc::new(move |s: f64| src.fields((-s).rem_euclid(1.0))) as Arc<dyn FramingSource>
        });
        NormalFraming {
            fields: self
                .fields
                .iter()
                .map(|f| (0..n).map(|j| f[(n - j) % n].clone()).collect())
                .collect(),
            source,
        }
    }

    pub fn transformed(&self, p: &Matrix) -> Self {
        let source = self.source.clone().map(|src| {
            let p = p.clone();
            Arc::new(move |s: f64| Ok(src.fields(s)?.into_iter().map(|v| &p * v).collect()))
                as Arc<dyn FramingSource>
        });
        NormalFraming {
            fields: self
                .fields
                .iter()
                .map(|f| f.iter().map(|v| p * v).collect())
                .collect(),
            source,
        }
    }

    /// Negate field `i` everywhere.
    pub fn with_negated_field(&self, i: usize) -> Self {
        let mut fields = self.fields.clone();
        for v in &mut fields[i] {
            *v = -&*v;
        }
        let source = self.source.clone().map(|src| {
            Arc::new(move |s: f64| {
                let mut f = src.fields(s)?;
                f[i] = -&f[i];
                Ok(f)
            }) as Arc<dyn FramingSource>
        });
        NormalFraming { fields, source }
    }
}
