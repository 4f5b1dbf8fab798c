use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use poissym::catalog::GeometryFixture;
use poissym::geom::{MetricSpace, Signature};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub manifold: Manifold,
    pub metric: MetricBlock,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub vectorfields: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlinearity: Option<Nonlinearity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ansatz: Option<Ansatz>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Manifold {
    pub coords: Vec<String>,
    #[serde(default = "riemannian")]
    pub signature: String,
    #[serde(rename = "box", default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bbox: BTreeMap<String, [f64; 2]>,
}

fn riemannian() -> String {
    "riemannian".into()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MetricBlock {
    pub g: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Nonlinearity {
    pub class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Ansatz {
    pub basis: Vec<String>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn from_fixture(fx: &GeometryFixture) -> Self {
        let m = &fx.metric;
        let coords: Vec<String> = m.table().coords().iter().map(|s| s.name().to_string()).collect();
        let bbox = coords
            .iter()
            .zip(m.sample_box())
            .map(|(c, &(lo, hi))| (c.clone(), [lo, hi]))
            .collect();
        Manifest {
            manifold: Manifold {
                coords,
                signature: m.signature().name().to_string(),
                bbox,
            },
            metric: MetricBlock { g: m.metric_strings() },
            vectorfields: fx.killing.iter().map(|(n, f)| (n.clone(), f.strings())).collect(),
            nonlinearity: None,
            ansatz: Some(Ansatz {
                basis: fx.ansatz.clone(),
            }),
        }
    }

    pub fn metric(&self) -> Result<MetricSpace, CliError> {
        let coords = &self.manifold.coords;
        let signature = match self.manifold.signature.as_str() {
            "riemannian" => Signature::Riemannian,
            "lorentzian" => Signature::Lorentzian,
            other => return Err(CliError::Input(format!("unknown signature `{other}`"))),
        };
        for k in self.manifold.bbox.keys() {
            if !coords.contains(k) {
                return Err(CliError::Input(format!("box names unknown coordinate `{k}`")));
            }
        }
        let bbox = coords
            .iter()
            .map(|c| match self.manifold.bbox.get(c) {
                Some(&[lo, hi]) if lo < hi => Ok((lo, hi)),
                Some(_) => Err(CliError::Input(format!("empty box for `{c}`"))),
                None => Ok((-1.0, 1.0)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MetricSpace::from_strings(coords, &self.metric.g, signature, bbox)?)
    }
}
