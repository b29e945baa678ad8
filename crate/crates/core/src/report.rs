//! The JSON report emitted for every computation.

use serde::{Deserialize, Serialize};

use crate::numkit::Tolerances;
use crate::z2::Z2;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub index: Z2,
    /// Winding parity around the periodic factor; `null` when the ambient has none.
    pub winding_parity: Option<Z2>,
    pub samples: usize,
    pub length: f64,
    /// The π₁(SO) classes combined into the index, in order of computation.
    pub loop_classes: Vec<Z2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Largest residual over traced samples; `null` for links given as data.
    pub max_residual: Option<f64>,
    pub refinement_depth: usize,
    pub lift_steps: usize,
    /// Seeds dropped because Newton found no solution near them.
    pub seeds_without_solution: Vec<usize>,
    pub tolerances: Tolerances,
}

impl Diagnostics {
    pub fn new(tolerances: Tolerances) -> Self {
        Diagnostics {
            max_residual: None,
            refinement_depth: 0,
            lift_steps: 0,
            seeds_without_solution: Vec::new(),
            tolerances,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub schema: u32,
    pub source: String,
    pub components: Vec<ComponentReport>,
    pub kappa: Z2,
    pub nonzero_count_mod2: Z2,
    /// Pontryagin's δ, present for links in Euclidean space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Z2>,
    pub diagnostics: Diagnostics,
}

impl InvariantReport {
    pub fn new(components: Vec<ComponentReport>, diagnostics: Diagnostics) -> Self {
        let kappa: Z2 = components.iter().map(|c| c.index).sum();
        let nonzero = components.iter().filter(|c| c.index == Z2::ONE).count();
        InvariantReport {
            schema: SCHEMA_VERSION,
            source: String::new(),
            components,
            kappa,
            nonzero_count_mod2: Z2::parity(nonzero as i64),
            delta: None,
            diagnostics,
        }
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn indices(&self) -> Vec<Z2> {
        self.components.iter().map(|c| c.index).collect()
    }

    /// κ is the XOR of the component indices and agrees with the count of
    /// non-zero components mod 2.
    pub fn is_consistent(&self) -> bool {
        let xor: Z2 = self.components.iter().map(|c| c.index).sum();
        xor == self.kappa && self.nonzero_count_mod2 == self.kappa
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
