//! JSON link files: a framed link given as sampled points and normal fields.
//!
//! ```json
//! {
//!   "ambient": { "kind": "cylinder", "dimension": 5, "spin_twist": "nonstandard" },
//!   "components": [
//!     { "points": [[x1, ..., xN], ...], "framing": [[[...], ...], ...] }
//!   ]
//! }
//! ```
//!
//! `framing` is indexed field, then sample, then coordinate. Samples carry no
//! analytic source, so loops too coarse for the lift are rejected, not refined.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framedlink::{
    invariant_report, AmbientPresentation, FramedCircle, FramedLink, NormalFraming, SampledLoop,
    SpinChoice,
};
use crate::numkit::{Tolerances, Vector};
use crate::report::InvariantReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileAmbientKind {
    Euclidean,
    Sphere,
    Cylinder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientDoc {
    pub kind: FileAmbientKind,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin_twist: Option<SpinChoice>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub points: Vec<Vec<f64>>,
    pub framing: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDocument {
    pub ambient: AmbientDoc,
    pub components: Vec<ComponentDoc>,
}

impl LinkDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Serialize a link's sampled data.
    pub fn from_link(link: &FramedLink) -> Result<Self> {
        let amb = link.ambient();
        let (kind, spin_twist) = match amb.kind() {
            crate::framedlink::AmbientKind::Euclidean => (FileAmbientKind::Euclidean, None),
            crate::framedlink::AmbientKind::Sphere => (FileAmbientKind::Sphere, None),
            crate::framedlink::AmbientKind::Cylinder => {
                (FileAmbientKind::Cylinder, amb.spin_choice())
            }
            crate::framedlink::AmbientKind::Custom => {
                return Err(Error::AmbientMismatch(format!(
                    "`{}` has no file form",
                    amb.label()
                )))
            }
        };
        let components = link
            .components()
            .iter()
            .map(|c| ComponentDoc {
                points: c
                    .loop_
                    .points()
                    .iter()
                    .map(|p| p.iter().copied().collect())
                    .collect(),
                framing: c
                    .framing
                    .fields()
                    .iter()
                    .map(|f| f.iter().map(|v| v.iter().copied().collect()).collect())
                    .collect(),
            })
            .collect();
        Ok(LinkDocument {
            ambient: AmbientDoc {
                kind,
                dimension: amb.dimension(),
                spin_twist,
            },
            components,
        })
    }

    pub fn ambient(&self) -> Result<AmbientPresentation> {
        let n = self.ambient.dimension;
        if n < 3 {
            return Err(Error::validation(
                "ambient dimension at least 3",
                format!("got {n}"),
            ));
        }
        match (self.ambient.kind, self.ambient.spin_twist) {
            (
                FileAmbientKind::Euclidean | FileAmbientKind::Sphere,
                Some(SpinChoice::Nonstandard),
            ) => Err(Error::validation(
                "nonstandard spin only on the cylinder",
                "a simply connected ambient has one spin structure",
            )),
            (FileAmbientKind::Euclidean, _) => Ok(AmbientPresentation::euclidean(n)),
            (FileAmbientKind::Sphere, _) => Ok(AmbientPresentation::sphere(n)),
            (FileAmbientKind::Cylinder, spin) => {
                Ok(AmbientPresentation::cylinder(n, spin.unwrap_or_default()))
            }
        }
    }

    /// Build and validate the framed link.
    pub fn to_link(&self, tol: &Tolerances) -> Result<FramedLink> {
        let ambient = self.ambient()?;
        let components = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                component(c).map_err(|e| match e {
                    Error::Validation { invariant, detail } => Error::Validation {
                        invariant,
                        detail: format!("component {i}: {detail}"),
                    },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        FramedLink::new(ambient, components, tol)
    }
}

fn component(c: &ComponentDoc) -> Result<FramedCircle> {
    let points = c.points.iter().map(|p| Vector::from_row_slice(p)).collect();
    let loop_ = SampledLoop::from_points(points)?;
    let fields = c
        .framing
        .iter()
        .map(|f| f.iter().map(|v| Vector::from_row_slice(v)).collect())
        .collect();
    let framing = NormalFraming::new(fields)?;
    if framing.count() > 0 && framing.samples() != loop_.len() {
        return Err(Error::validation(
            "one framing vector per sample",
            format!(
                "{} points, {} framing samples",
                loop_.len(),
                framing.samples()
            ),
        ));
    }
    Ok(FramedCircle::new(loop_, framing))
}

pub fn load_link(text: &str, tol: &Tolerances) -> Result<FramedLink> {
    LinkDocument::parse(text)?.to_link(tol)
}

pub fn load_link_file(path: &Path, tol: &Tolerances) -> Result<FramedLink> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    load_link(&text, tol)
}

/// Report for a link file, with the loaded link for export.
pub fn run_link_file(path: &Path, tol: &Tolerances) -> Result<(InvariantReport, FramedLink)> {
    let link = load_link_file(path, tol)?;
    let report = invariant_report(&link, tol)?.with_source(path.display().to_string());
    Ok((report, link))
}
