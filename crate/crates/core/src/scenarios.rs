//! Built-in worked examples, runnable by name with a few overrides.

use std::collections::BTreeSet;
use std::f64::consts::SQRT_2;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::framedlink::{
    invariant_report, standard, twist_framing, AmbientPresentation, FramedCircle, FramedLink,
    SampledLoop, SpinChoice,
};
use crate::numkit::{Matrix, Tolerances, Vector};
use crate::report::InvariantReport;
use crate::tracer::{
    kappa_of_map, section_index, Domain, MapSpec, SectionSpec, Target, TraceOptions,
};
use crate::z2::Z2;

/// A report and the component geometry behind it.
type Run = (InvariantReport, Vec<SampledLoop>);

/// Settings a scenario run may change.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub ortho_tol: Option<f64>,
    pub newton_tol: Option<f64>,
    pub closure_tol: Option<f64>,
    pub lift_angle_max: Option<f64>,
    pub samples: Option<usize>,
    pub spin: Option<SpinChoice>,
    pub value: Option<Vec<f64>>,
    pub turns: Option<i64>,
    pub circles: Option<usize>,
}

const TOLERANCE_KEYS: [&str; 4] = ["ortho_tol", "newton_tol", "closure_tol", "lift_angle_max"];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("`{key}` expects a number, got `{value}`")))
}

impl Overrides {
    /// Parse `key=value` assignments.
    pub fn parse<S: AsRef<str>>(assignments: &[S]) -> Result<Self> {
        let mut o = Overrides::default();
        for a in assignments {
            let a = a.as_ref();
            let (k, v) = a
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("override `{a}` is not key=value")))?;
            o.set(k.trim(), v)?;
        }
        Ok(o)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "ortho_tol" => self.ortho_tol = Some(parse_num(key, value)?),
            "newton_tol" => self.newton_tol = Some(parse_num(key, value)?),
            "closure_tol" => self.closure_tol = Some(parse_num(key, value)?),
            "lift_angle_max" => self.lift_angle_max = Some(parse_num(key, value)?),
            "samples" => self.samples = Some(parse_num(key, value)?),
            "spin" => self.spin = Some(value.trim().parse()?),
            "turns" => self.turns = Some(parse_num(key, value)?),
            "circles" => self.circles = Some(parse_num(key, value)?),
            "value" => {
                self.value = Some(
                    value
                        .split(',')
                        .map(|c| parse_num(key, c))
                        .collect::<Result<Vec<f64>>>()?,
                )
            }
            other => return Err(Error::Parse(format!("unknown override `{other}`"))),
        }
        Ok(())
    }

    fn keys(&self) -> Vec<&'static str> {
        let mut k = Vec::new();
        let flags = [
            ("ortho_tol", self.ortho_tol.is_some()),
            ("newton_tol", self.newton_tol.is_some()),
            ("closure_tol", self.closure_tol.is_some()),
            ("lift_angle_max", self.lift_angle_max.is_some()),
            ("samples", self.samples.is_some()),
            ("spin", self.spin.is_some()),
            ("value", self.value.is_some()),
            ("turns", self.turns.is_some()),
            ("circles", self.circles.is_some()),
        ];
        for (name, set) in flags {
            if set {
                k.push(name);
            }
        }
        k
    }

    /// True when nothing but tolerances is overridden.
    pub fn tolerances_only(&self) -> bool {
        self.keys().iter().all(|k| TOLERANCE_KEYS.contains(k))
    }

    pub fn tolerances(&self) -> Result<Tolerances> {
        let d = Tolerances::default();
        let t = Tolerances {
            ortho_tol: self.ortho_tol.unwrap_or(d.ortho_tol),
            newton_tol: self.newton_tol.unwrap_or(d.newton_tol),
            closure_tol: self.closure_tol.unwrap_or(d.closure_tol),
            lift_angle_max: self.lift_angle_max.unwrap_or(d.lift_angle_max),
        };
        t.validate()?;
        Ok(t)
    }

    fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }
}

/// Values a scenario must reproduce in check mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Expected {
    pub kappa: Z2,
    pub indices: Option<Vec<Z2>>,
}

impl Expected {
    /// Descriptions of every mismatch against `report`.
    pub fn mismatches(&self, report: &InvariantReport) -> Vec<String> {
        let mut out = Vec::new();
        if report.kappa != self.kappa {
            out.push(format!(
                "kappa is {}, expected {}",
                report.kappa, self.kappa
            ));
        }
        if let Some(ix) = &self.indices {
            if &report.indices() != ix {
                out.push(format!(
                    "indices are {:?}, expected {:?}",
                    bits(&report.indices()),
                    bits(ix)
                ));
            }
        }
        if !report.is_consistent() {
            out.push("kappa disagrees with the nonzero-component count".into());
        }
        if let Some(delta) = report.delta {
            if delta != report.kappa {
                out.push(format!("delta {delta} differs from kappa {}", report.kappa));
            }
        }
        out
    }
}

fn bits(v: &[Z2]) -> Vec<u8> {
    v.iter().map(|z| z.bit()).collect()
}

/// A completed scenario run.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub name: &'static str,
    pub report: InvariantReport,
    pub expected: Expected,
    /// Component geometry, for CSV export.
    pub loops: Vec<SampledLoop>,
}

impl ScenarioOutcome {
    pub fn mismatches(&self) -> Vec<String> {
        self.expected.mismatches(&self.report)
    }
}

pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub keys: &'static [&'static str],
    run: fn(&Overrides, &Tolerances) -> Result<Run>,
    expected: fn(&Overrides) -> Expected,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario")
            .field("name", &self.name)
            .finish()
    }
}

impl Scenario {
    pub fn expected(&self, overrides: &Overrides) -> Expected {
        (self.expected)(overrides)
    }

    pub fn run(&self, overrides: &Overrides) -> Result<ScenarioOutcome> {
        let allowed: BTreeSet<&str> = self
            .keys
            .iter()
            .chain(TOLERANCE_KEYS.iter())
            .copied()
            .collect();
        if let Some(bad) = overrides.keys().into_iter().find(|k| !allowed.contains(k)) {
            return Err(Error::validation(
                "override accepted by scenario",
                format!("`{}` does not take `{bad}`", self.name),
            ));
        }
        let tol = overrides.tolerances()?;
        let (report, loops) = (self.run)(overrides, &tol)?;
        Ok(ScenarioOutcome {
            name: self.name,
            report: report.with_source(self.name),
            expected: self.expected(overrides),
            loops,
        })
    }
}

fn kappa_only(kappa: Z2) -> Expected {
    Expected {
        kappa,
        indices: None,
    }
}

fn link_outcome(link: &FramedLink, tol: &Tolerances) -> Result<Run> {
    let report = invariant_report(link, tol)?;
    Ok((
        report,
        link.components().iter().map(|c| c.loop_.clone()).collect(),
    ))
}

fn pontryagin_circle(o: &Overrides, tol: &Tolerances) -> Result<Run> {
    let c = standard::pontryagin_circle(4, o.samples_or(64), Vector::zeros(4))?;
    let framing = twist_framing(&c.loop_, &c.framing, o.turns.unwrap_or(0))?;
    let link = FramedLink::new(
        AmbientPresentation::euclidean(4),
        vec![FramedCircle::new(c.loop_, framing)],
        tol,
    )?;
    link_outcome(&link, tol)
}

fn sphere_great_circle(o: &Overrides, tol: &Tolerances) -> Result<Run> {
    let c = standard::great_circle(5, o.samples_or(64))?;
    let framing = twist_framing(&c.loop_, &c.framing, o.turns.unwrap_or(0))?;
    let link = FramedLink::new(
        AmbientPresentation::sphere(5),
        vec![FramedCircle::new(c.loop_, framing)],
        tol,
    )?;
    link_outcome(&link, tol)
}

fn cylinder_circles(o: &Overrides) -> Result<usize> {
    match o.circles.unwrap_or(1) {
        n @ (1 | 2) => Ok(n),
        n => Err(Error::validation("circles is 1 or 2", format!("got {n}"))),
    }
}

fn cylinder_spin(o: &Overrides, tol: &Tolerances) -> Result<Run> {
    let n = o.samples_or(64);
    let amb = AmbientPresentation::cylinder(5, o.spin.unwrap_or_default());
    let offsets: &[[f64; 3]] = &[[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
    let comps = offsets[..cylinder_circles(o)?]
        .iter()
        .map(|q| standard::product_circle(5, n, q))
        .collect::<Result<Vec<_>>>()?;
    link_outcome(&FramedLink::new(amb, comps, tol)?, tol)
}

fn cylinder_expected(o: &Overrides) -> Expected {
    let circles = o.circles.unwrap_or(1);
    let per = match o.spin.unwrap_or_default() {
        SpinChoice::Standard => Z2::ZERO,
        SpinChoice::Nonstandard => Z2::ONE,
    };
    Expected {
        kappa: if circles.is_multiple_of(2) {
            Z2::ZERO
        } else {
            per
        },
        indices: Some(vec![per; circles.min(2)]),
    }
}

/// The suspended Hopf map S⁴ → S³, (t, y) ↦ (t, y i ȳ / |y|).
pub fn suspended_hopf(p: &Vector) -> Result<Vector> {
    let (t, a, b, c, d) = (p[0], p[1], p[2], p[3], p[4]);
    let r = (a * a + b * b + c * c + d * d).sqrt();
    if !(r > 1e-12) {
        return Err(Error::EvaluationFailure(
            "suspended Hopf map at a pole".into(),
        ));
    }
    Ok(Vector::from_row_slice(&[
        t,
        (a * a + b * b - c * c - d * d) / r,
        2.0 * (b * c + a * d) / r,
        2.0 * (b * d - a * c) / r,
    ]))
}

/// Default regular value (0, i) and its normalized override.
fn hopf_value(o: &Overrides) -> Result<Vector> {
    let v = Vector::from_vec(o.value.clone().unwrap_or_else(|| vec![0.0, 1.0, 0.0, 0.0]));
    if v.len() != 4 {
        return Err(Error::validation(
            "regular value in S^3",
            format!("{} coordinates given", v.len()),
        ));
    }
    let v = v.normalize();
    if !(v[0].abs() < 1.0 - 1e-6) {
        return Err(Error::validation(
            "regular value away from the poles",
            format!("t = {}", v[0]),
        ));
    }
    Ok(v)
}

/// A point of the preimage of `value`: y = ρ·r with r the unit quaternion
/// rotating i to the imaginary direction of `value`.
pub fn hopf_seed(value: &Vector) -> Vector {
    let t0 = value[0];
    let q = Vector::from_row_slice(&[value[1], value[2], value[3]]).normalize();
    let r = if 1.0 + q[0] > 1e-9 {
        Vector::from_row_slice(&[1.0 + q[0], 0.0, -q[2], q[1]]).normalize()
    } else {
        Vector::from_row_slice(&[0.0, 0.0, 1.0, 0.0])
    };
    let rho = (1.0 - t0 * t0).sqrt();
    Vector::from_row_slice(&[t0, rho * r[0], rho * r[1], rho * r[2], rho * r[3]])
}

pub fn suspended_hopf_spec(value: Vector) -> MapSpec {
    MapSpec::new(
        5,
        Domain::UnitSphere,
        Target::Sphere { value },
        Arc::new(suspended_hopf),
    )
}

fn suspended_hopf_run(o: &Overrides, tol: &Tolerances) -> Result<Run> {
    let value = hopf_value(o)?;
    let seed = hopf_seed(&value);
    let opts = TraceOptions {
        seeds: vec![seed.iter().copied().collect()],
        tolerances: *tol,
        ..TraceOptions::default()
    };
    let r = kappa_of_map(
        &suspended_hopf_spec(value),
        &opts,
        &AmbientPresentation::sphere(5),
    )?;
    Ok((r.report, r.curves.into_iter().map(|c| c.loop_).collect()))
}

/// F(x) = (x₁² + x₂² − 1, x₃, x₄) on ℝ⁴.
pub fn quadric_spec() -> MapSpec {
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
    .with_jacobian(Arc::new(|x: &Vector| {
        Ok(Matrix::from_row_slice(
            3,
            4,
            &[
                2.0 * x[0],
                2.0 * x[1],
                0.0,
                0.0,
                0.0,
                0.0,
                1.0,
                0.0,
                0.0,
                0.0,
                0.0,
                1.0,
            ],
        ))
    }))
}

/// F with its first two components rotated by the polar angle of (x₁, x₂).
pub fn twisted_quadric_spec() -> MapSpec {
    MapSpec::new(
        4,
        Domain::Euclidean,
        Target::Euclidean {
            value: Vector::zeros(3),
        },
        Arc::new(|x: &Vector| {
            let r = x[0].hypot(x[1]);
            if !(r > 1e-12) {
                return Err(Error::EvaluationFailure(
                    "polar angle undefined on the axis".into(),
                ));
            }
            let (c, s) = (x[0] / r, x[1] / r);
            let (f1, f2) = (x[0] * x[0] + x[1] * x[1] - 1.0, x[2]);
            Ok(Vector::from_row_slice(&[
                c * f1 - s * f2,
                s * f1 + c * f2,
                x[3],
            ]))
        }),
    )
}

pub const QUADRIC_SEED: [f64; 4] = [1.1, 0.0, 0.05, -0.02];

fn quadric_run(spec: MapSpec, tol: &Tolerances) -> Result<Run> {
    let opts = TraceOptions {
        seeds: vec![QUADRIC_SEED.to_vec()],
        tolerances: *tol,
        ..TraceOptions::default()
    };
    let r = kappa_of_map(&spec, &opts, &AmbientPresentation::euclidean(4))?;
    Ok((r.report, r.curves.into_iter().map(|c| c.loop_).collect()))
}

fn s5_v(x: &Vector) -> Vector {
    Vector::from_row_slice(&[-x[1], x[0], -x[3], x[2], -x[5], x[4]])
}

/// E ⊂ TS⁵ split off by v(x) = (−x₂, x₁, −x₄, x₃, −x₆, x₅), with the
/// section w(x) = (0, 0, −x₅, x₆, x₃, −x₄).
pub fn s5_section_spec() -> SectionSpec {
    SectionSpec::new(
        6,
        Arc::new(s5_v),
        Arc::new(|x: &Vector| Vector::from_row_slice(&[0.0, 0.0, -x[4], x[5], x[2], -x[3]])),
    )
}

/// Same E with the section e₃ projected onto E.
pub fn s5_alt_section_spec() -> SectionSpec {
    SectionSpec::new(
        6,
        Arc::new(s5_v),
        Arc::new(|x: &Vector| {
            let mut w = x * (-x[2]) + s5_v(x) * x[3];
            w[2] += 1.0;
            w
        }),
    )
}

pub const S5_SEED: [f64; 6] = [1.0, 0.02, 0.01, 0.0, -0.01, 0.0];
pub const S5_ALT_SEED: [f64; 6] = [0.01, 0.0, 1.0, 0.02, 0.0, -0.01];

fn section_run(spec: SectionSpec, seed: &[f64], tol: &Tolerances) -> Result<Run> {
    let opts = TraceOptions {
        seeds: vec![seed.to_vec()],
        tolerances: *tol,
        ..TraceOptions::default()
    };
    let r = section_index(&spec, &opts)?;
    Ok((
        r.report,
        r.components.into_iter().map(|c| c.loop_).collect(),
    ))
}

/// Every registered scenario, in listing order.
pub fn registry() -> &'static [Scenario] {
    const SCENARIOS: &[Scenario] = &[
        Scenario {
            name: "pontryagin-circle",
            summary: "unit circle in R^4 framed by (V, E3, E4), twisted `turns` times",
            keys: &["turns", "samples"],
            run: pontryagin_circle,
            expected: |o| Expected {
                kappa: Z2::parity(o.turns.unwrap_or(0)),
                indices: Some(vec![Z2::parity(o.turns.unwrap_or(0))]),
            },
        },
        Scenario {
            name: "sphere-great-circle",
            summary: "great circle in S^4 with constant normal framing, twisted `turns` times",
            keys: &["turns", "samples"],
            run: sphere_great_circle,
            expected: |o| kappa_only(Z2::parity(o.turns.unwrap_or(0))),
        },
        Scenario {
            name: "cylinder-spin",
            summary: "product circles S^1 x {q} in S^1 x R^3 under either spin structure",
            keys: &["spin", "circles", "samples"],
            run: cylinder_spin,
            expected: cylinder_expected,
        },
        Scenario {
            name: "suspended-hopf",
            summary: "preimage of a regular value of the suspended Hopf map S^4 -> S^3",
            keys: &["value"],
            run: suspended_hopf_run,
            expected: |_| kappa_only(Z2::ONE),
        },
        Scenario {
            name: "euclidean-quadric",
            summary: "zero set of F = (x1^2 + x2^2 - 1, x3, x4) on R^4",
            keys: &[],
            run: |_, tol| quadric_run(quadric_spec(), tol),
            expected: |_| kappa_only(Z2::ZERO),
        },
        Scenario {
            name: "euclidean-quadric-twisted",
            summary: "F with its first two components rotated by the polar angle",
            keys: &[],
            run: |_, tol| quadric_run(twisted_quadric_spec(), tol),
            expected: |_| kappa_only(Z2::ONE),
        },
        Scenario {
            name: "s5-vector-fields",
            summary: "degree of E = <v>^perp in TS^5 from the zeros of w",
            keys: &[],
            run: |_, tol| section_run(s5_section_spec(), &S5_SEED, tol),
            expected: |_| kappa_only(Z2::ONE),
        },
        Scenario {
            name: "s5-alt-section",
            summary: "degree of the same E from the projection of e3",
            keys: &[],
            run: |_, tol| section_run(s5_alt_section_spec(), &S5_ALT_SEED, tol),
            expected: |_| kappa_only(Z2::ONE),
        },
    ];
    SCENARIOS
}

pub fn find(name: &str) -> Result<&'static Scenario> {
    registry()
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

pub fn run_scenario(name: &str, overrides: &Overrides) -> Result<ScenarioOutcome> {
    find(name)?.run(overrides)
}

/// The second regular value used for the counting check: (0.3, √0.91·j).
pub fn hopf_alternate_value() -> Vec<f64> {
    vec![0.3, 0.0, 0.91_f64.sqrt(), 0.0]
}

/// Seed on the preimage of (0, j): (0, 1/√2, 0, 0, 1/√2).
pub fn hopf_j_seed() -> Vec<f64> {
    vec![0.0, 1.0 / SQRT_2, 0.0, 0.0, 1.0 / SQRT_2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_unique() {
        let names: BTreeSet<_> = registry().iter().map(|s| s.name).collect();
        assert_eq!(names.len(), registry().len());
    }

    #[test]
    fn unknown_scenario() {
        assert!(matches!(
            run_scenario("nope", &Overrides::default()),
            Err(Error::UnknownScenario(_))
        ));
    }

    #[test]
    fn override_parsing() {
        let o = Overrides::parse(&[
            "turns=3",
            "spin=nonstandard",
            "value=0,0,1,0",
            "closure_tol=1e-7",
        ])
        .unwrap();
        assert_eq!(o.turns, Some(3));
        assert_eq!(o.spin, Some(SpinChoice::Nonstandard));
        assert_eq!(o.value, Some(vec![0.0, 0.0, 1.0, 0.0]));
        assert_eq!(o.tolerances().unwrap().closure_tol, 1e-7);
        assert!(matches!(
            Overrides::parse(&["bogus=1"]),
            Err(Error::Parse(_))
        ));
        assert!(matches!(Overrides::parse(&["turns"]), Err(Error::Parse(_))));
        assert!(matches!(
            Overrides::parse(&["turns=x"]),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn scenario_rejects_foreign_keys() {
        let o = Overrides::parse(&["turns=1"]).unwrap();
        assert!(matches!(
            run_scenario("suspended-hopf", &o),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn hopf_map_closed_form() {
        // y = cos θ + sin θ·k rotates i by 2θ about k.
        let th = 0.3_f64;
        let p = Vector::from_row_slice(&[0.0, th.cos(), 0.0, 0.0, th.sin()]);
        let f = suspended_hopf(&p).unwrap();
        assert!((f[1] - (2.0 * th).cos()).abs() < 1e-15);
        assert!((f[2] - (2.0 * th).sin()).abs() < 1e-15);
        assert!(f[3].abs() < 1e-15);
        for v in [
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            hopf_alternate_value(),
            vec![0.1, -1.0, 0.0, 0.0],
        ] {
            let v = Vector::from_vec(v).normalize();
            let s = hopf_seed(&v);
            assert!((s.norm() - 1.0).abs() < 1e-14);
            assert!((suspended_hopf(&s).unwrap() - &v).norm() < 1e-14);
        }
        let j = Vector::from_row_slice(&[0.0, 0.0, 1.0, 0.0]);
        assert!((hopf_seed(&j) - Vector::from_vec(hopf_j_seed())).norm() < 1e-15);
    }

    #[test]
    fn closed_form_scenarios() {
        for turns in 0..4 {
            let o = Overrides::parse(&[format!("turns={turns}")]).unwrap();
            let out = run_scenario("pontryagin-circle", &o).unwrap();
            assert!(out.mismatches().is_empty(), "{:?}", out.mismatches());
            assert_eq!(out.report.kappa, Z2::parity(turns));
        }
        let out = run_scenario("sphere-great-circle", &Overrides::default()).unwrap();
        assert_eq!(out.report.kappa, Z2::ZERO);
        for spin in ["standard", "nonstandard"] {
            for circles in [1, 2] {
                let o = Overrides::parse(&[format!("spin={spin}"), format!("circles={circles}")])
                    .unwrap();
                let out = run_scenario("cylinder-spin", &o).unwrap();
                assert!(
                    out.mismatches().is_empty(),
                    "{spin} {circles}: {:?}",
                    out.mismatches()
                );
            }
        }
    }
}
