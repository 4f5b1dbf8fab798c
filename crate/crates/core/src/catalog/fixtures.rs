use crate::detsys::{AnsatzBasis, DetError};
use crate::exprcore::{qi, qr, Q};
use crate::geom::{GeomError, MetricSpace, Signature, VectorField};

pub const NAMES: [&str; 8] = [
    "euclidean",
    "hyperbolic3",
    "sphere3",
    "sol",
    "s2xr",
    "h2xr",
    "sl2tilde",
    "heisenberg",
];

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown geometry `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// One of the eight model geometries together with the data it is checked against.
#[derive(Debug, Clone)]
pub struct GeometryFixture {
    pub name: &'static str,
    pub metric: MetricSpace,
    /// Named Killing fields.
    pub killing: Vec<(String, VectorField)>,
    pub scalar_curvature: Q,
    pub isometry_dim: usize,
    /// Function basis handed to the ansatz solver.
    pub ansatz: Vec<String>,
    /// Optional pairs whose bracket is asserted, `(a, b, expected)` as field strings.
    pub brackets: Vec<BracketCheck>,
}

#[derive(Debug, Clone)]
pub struct BracketCheck {
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub expected: Vec<String>,
}

fn strs(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn diag(entries: [&str; 3]) -> Vec<Vec<String>> {
    (0..3)
        .map(|i| (0..3).map(|j| if i == j { entries[i].to_string() } else { "0".into() }).collect())
        .collect()
}

/// Monomials of total degree at most `d` in the given coordinates.
pub fn polynomial_basis(coords: &[&str], d: u32) -> Vec<String> {
    let mut out = vec!["1".to_string()];
    let mut layer: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::new();
        for m in &layer {
            let start = m.last().copied().unwrap_or(0);
            for i in start..coords.len() {
                let mut mm = m.clone();
                mm.push(i);
                next.push(mm);
            }
        }
        for m in &next {
            let parts: Vec<&str> = m.iter().map(|&i| coords[i]).collect();
            out.push(parts.join("*"));
        }
        layer = next;
    }
    out
}

struct Recipe {
    coords: [&'static str; 3],
    g: Vec<Vec<String>>,
    bbox: [(f64, f64); 3],
    killing: Vec<(&'static str, [&'static str; 3])>,
    r: Q,
    dim: usize,
    ansatz: Vec<String>,
    brackets: Vec<BracketCheck>,
}

fn recipe(name: &str) -> Option<Recipe> {
    let xyz = ["x", "y", "z"];
    let unit = [(-1.0, 1.0); 3];
    let poly2 = polynomial_basis(&xyz, 2);
    Some(match name {
        "euclidean" => Recipe {
            coords: xyz,
            g: diag(["1", "1", "1"]),
            bbox: unit,
            killing: vec![
                ("R1", ["1", "0", "0"]),
                ("R2", ["0", "1", "0"]),
                ("R3", ["0", "0", "1"]),
                ("R4", ["y", "-x", "0"]),
                ("R5", ["0", "-z", "y"]),
                ("R6", ["z", "0", "-x"]),
            ],
            r: qi(0),
            dim: 6,
            ansatz: poly2,
            brackets: vec![],
        },
        "hyperbolic3" => Recipe {
            coords: xyz,
            g: diag(["1/z^2", "1/z^2", "1/z^2"]),
            bbox: [(-1.0, 1.0), (-1.0, 1.0), (0.5, 2.0)],
            killing: vec![
                ("H1", ["1", "0", "0"]),
                ("H2", ["0", "1", "0"]),
                ("H3", ["-y", "x", "0"]),
                ("H4", ["x", "y", "z"]),
                ("H5", ["(x^2-y^2-z^2)/2", "x*y", "x*z"]),
                ("H6", ["x*y", "(-x^2+y^2-z^2)/2", "y*z"]),
            ],
            r: qi(-6),
            dim: 6,
            ansatz: poly2,
            brackets: vec![],
        },
        "sphere3" => {
            let c = "4/(1+x^2+y^2+z^2)^2";
            Recipe {
                coords: xyz,
                g: diag([c, c, c]),
                bbox: unit,
                killing: vec![
                    ("S1", ["1+x^2-y^2-z^2", "2*x*y", "2*x*z"]),
                    ("S2", ["2*x*y", "1-x^2+y^2-z^2", "2*z*y"]),
                    ("S3", ["2*x*z", "2*y*z", "1-x^2-y^2+z^2"]),
                    ("S4", ["y", "-x", "0"]),
                    ("S5", ["z", "0", "-x"]),
                    ("S6", ["0", "z", "-y"]),
                ],
                r: qi(6),
                dim: 6,
                ansatz: poly2,
                brackets: vec![],
            }
        }
        "sol" => Recipe {
            coords: xyz,
            g: diag(["1", "exp(2*x)", "exp(-2*x)"]),
            bbox: unit,
            killing: vec![
                ("So1", ["1", "-y", "z"]),
                ("So2", ["0", "1", "0"]),
                ("So3", ["0", "0", "1"]),
            ],
            r: qi(-2),
            dim: 3,
            ansatz: strs(&[
                "1",
                "x",
                "y",
                "z",
                "exp(2*x)",
                "exp(-2*x)",
                "y*exp(2*x)",
                "y*exp(-2*x)",
                "z*exp(2*x)",
                "z*exp(-2*x)",
            ]),
            brackets: vec![],
        },
        "s2xr" => {
            let c = "4/(1+x^2+y^2)^2";
            Recipe {
                coords: xyz,
                g: diag([c, c, "1"]),
                bbox: unit,
                killing: vec![
                    ("S'1", ["1+x^2-y^2", "2*x*y", "0"]),
                    ("S'2", ["2*x*y", "1-x^2+y^2", "0"]),
                    ("S'3", ["y", "-x", "0"]),
                    ("S'4", ["0", "0", "1"]),
                ],
                r: qi(2),
                dim: 4,
                ansatz: poly2,
                brackets: vec![],
            }
        }
        "h2xr" => Recipe {
            coords: xyz,
            g: diag(["1/y^2", "1/y^2", "1"]),
            bbox: [(-1.0, 1.0), (0.5, 2.0), (-1.0, 1.0)],
            killing: vec![
                ("X1", ["(x^2-y^2)/2", "x*y", "0"]),
                ("X2", ["1", "0", "0"]),
                ("X3", ["x", "y", "0"]),
                ("X4", ["0", "0", "1"]),
            ],
            r: qi(-2),
            dim: 4,
            ansatz: poly2,
            brackets: vec![],
        },
        "sl2tilde" => Recipe {
            coords: xyz,
            g: vec![
                strs(&["1", "1/z", "0"]),
                strs(&["1/z", "2/z^2", "0"]),
                strs(&["0", "0", "1/z^2"]),
            ],
            bbox: [(-1.0, 1.0), (-1.0, 1.0), (0.5, 2.0)],
            killing: vec![
                ("X1", ["1", "0", "0"]),
                ("X2", ["0", "1", "0"]),
                ("X3", ["0", "y", "z"]),
                ("X4", ["z", "(y^2-z^2)/2", "y*z"]),
            ],
            r: qr(-5, 2),
            dim: 4,
            ansatz: poly2,
            brackets: vec![],
        },
        "heisenberg" => {
            let xyt = ["x", "y", "t"];
            Recipe {
                coords: xyt,
                g: vec![
                    strs(&["1+4*y^2", "-4*x*y", "-2*y"]),
                    strs(&["-4*x*y", "1+4*x^2", "2*x"]),
                    strs(&["-2*y", "2*x", "1"]),
                ],
                bbox: unit,
                killing: vec![
                    ("T", ["0", "0", "1"]),
                    ("Xt", ["1", "0", "-2*y"]),
                    ("Yt", ["0", "1", "2*x"]),
                    ("R", ["y", "-x", "0"]),
                ],
                r: qi(-8),
                dim: 4,
                ansatz: polynomial_basis(&xyt, 2),
                brackets: vec![BracketCheck {
                    left: strs(&["1", "0", "2*y"]),
                    right: strs(&["0", "1", "-2*x"]),
                    expected: strs(&["0", "0", "-4"]),
                }],
            }
        }
        _ => return None,
    })
}

/// Loads a built-in fixture by name.
pub fn load(name: &str) -> Result<GeometryFixture, CatalogError> {
    let key = NAMES
        .iter()
        .copied()
        .find(|n| *n == name)
        .ok_or_else(|| CatalogError::Unknown(name.to_string()))?;
    let s = recipe(key).expect("every listed name has a recipe");
    let metric = MetricSpace::from_strings(&s.coords, &s.g, Signature::Riemannian, s.bbox.to_vec())?;
    let killing = s
        .killing
        .iter()
        .map(|(n, c)| Ok((n.to_string(), VectorField::from_strings(&metric, c)?)))
        .collect::<Result<Vec<_>, GeomError>>()?;
    Ok(GeometryFixture {
        name: key,
        metric,
        killing,
        scalar_curvature: s.r,
        isometry_dim: s.dim,
        ansatz: s.ansatz,
        brackets: s.brackets,
    })
}

pub fn load_all() -> Result<Vec<GeometryFixture>, CatalogError> {
    NAMES.iter().map(|n| load(n)).collect()
}

impl GeometryFixture {
    pub fn killing_fields(&self) -> Vec<VectorField> {
        self.killing.iter().map(|(_, f)| f.clone()).collect()
    }

    pub fn basis(&self) -> Result<AnsatzBasis, DetError> {
        AnsatzBasis::parse(&self.metric, &self.ansatz)
    }

    pub fn field(&self, name: &str) -> Option<&VectorField> {
        self.killing.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }
}
