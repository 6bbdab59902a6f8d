//! Named operator setups for demos and end-to-end runs.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::operator::DiffOperator;

#[derive(Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    /// Stage count used by `demo`.
    pub demo_stages: usize,
    build: fn() -> Vec<DiffOperator>,
}

impl Preset {
    pub fn operators(&self) -> Vec<DiffOperator> {
        (self.build)()
    }
}

fn shifted_identity() -> DiffOperator {
    DiffOperator::from_ints(&[2, 1]).expect("2I + D")
}

pub fn presets() -> BTreeMap<&'static str, Preset> {
    let list = [
        Preset { name: "maclane", description: "T = D", demo_stages: 3, build: || vec![DiffOperator::differentiation()] },
        Preset { name: "birkhoff", description: "T f(z) = f(z + 1)", demo_stages: 3, build: || vec![DiffOperator::unit_translation()] },
        Preset { name: "shifted-identity", description: "T = 2I + D", demo_stages: 3, build: || vec![shifted_identity()] },
        Preset {
            name: "multi",
            description: "T_1 = D and T_2 = 2I + D jointly",
            demo_stages: 3,
            build: || vec![DiffOperator::differentiation(), shifted_identity()],
        },
    ];
    list.into_iter().map(|p| (p.name, p)).collect()
}

pub fn preset(name: &str) -> Result<Preset> {
    presets()
        .remove(name)
        .ok_or_else(|| Error::Input(format!("unknown preset {name:?}; known: {}", presets().keys().copied().collect::<Vec<_>>().join(", "))))
}
