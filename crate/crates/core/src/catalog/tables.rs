//! Reference conservation-law tables, transcribed component by component
//! into the expression grammar. `F(u)` is the antiderivative of `f`.
//!
//! The flat-space rows are instances of the general current formulas; the
//! other geometries carry reference tables. Entries with a `typo` note are
//! known to disagree with the rebuilt current and are reported, not fixed.

#[derive(Debug, Clone, Copy)]
pub struct ReferenceCurrent {
    pub geometry: &'static str,
    /// Symmetry label and table letter as printed.
    pub label: &'static str,
    pub class: &'static str,
    pub xi: [&'static str; 3],
    pub a: &'static str,
    pub b: &'static str,
    pub components: [&'static str; 3],
    pub typo: Option<&'static str>,
}

const fn arb(
    geometry: &'static str,
    label: &'static str,
    xi: [&'static str; 3],
    components: [&'static str; 3],
    typo: Option<&'static str>,
) -> ReferenceCurrent {
    ReferenceCurrent {
        geometry,
        label,
        class: "arbitrary",
        xi,
        a: "0",
        b: "0",
        components,
        typo,
    }
}

const fn harmonic_b(
    geometry: &'static str,
    label: &'static str,
    b: &'static str,
    components: [&'static str; 3],
    typo: Option<&'static str>,
) -> ReferenceCurrent {
    ReferenceCurrent {
        geometry,
        label,
        class: "zero",
        xi: ["0", "0", "0"],
        a: "0",
        b,
        components,
        typo,
    }
}

pub const TABLES: &[ReferenceCurrent] = &[
    // Flat space.
    arb(
        "euclidean",
        "R1",
        ["1", "0", "0"],
        ["(u_y^2+u_z^2-u_x^2)/2 - F(u)", "-u_x*u_y", "-u_x*u_z"],
        None,
    ),
    arb(
        "euclidean",
        "R4",
        ["y", "-x", "0"],
        [
            "y*(u_x^2+u_y^2+u_z^2)/2 - (y*u_x-x*u_y)*u_x - y*F(u)",
            "-x*(u_x^2+u_y^2+u_z^2)/2 - (y*u_x-x*u_y)*u_y + x*F(u)",
            "-(y*u_x-x*u_y)*u_z",
        ],
        None,
    ),
    arb(
        "euclidean",
        "R6",
        ["z", "0", "-x"],
        [
            "z*(u_x^2+u_y^2+u_z^2)/2 - (z*u_x-x*u_z)*u_x - z*F(u)",
            "-(z*u_x-x*u_z)*u_y",
            "-x*(u_x^2+u_y^2+u_z^2)/2 - (z*u_x-x*u_z)*u_z + x*F(u)",
        ],
        None,
    ),
    harmonic_b("euclidean", "Rinf (b = x)", "x", ["x*u_x - u", "x*u_y", "x*u_z"], None),
    ReferenceCurrent {
        geometry: "euclidean",
        label: "R8",
        class: "critical",
        xi: ["x*z", "y*z", "(z^2-x^2-y^2)/2"],
        a: "-z/2",
        b: "0",
        components: [
            "x*z*(u_x^2+u_y^2+u_z^2)/2 - (x*z*u_x+y*z*u_y+(z^2-x^2-y^2)/2*u_z)*u_x - x*z*u^6/6 - z*u*u_x/2",
            "y*z*(u_x^2+u_y^2+u_z^2)/2 - (x*z*u_x+y*z*u_y+(z^2-x^2-y^2)/2*u_z)*u_y - y*z*u^6/6 - z*u*u_y/2",
            "(z^2-x^2-y^2)/4*(u_x^2+u_y^2+u_z^2) - (x*z*u_x+y*z*u_y+(z^2-x^2-y^2)/2*u_z)*u_z \
             - (z^2-x^2-y^2)/12*u^6 - z*u*u_z/2 + u^2/4",
        ],
        typo: None,
    },
    // Hyperbolic space.
    arb(
        "hyperbolic3",
        "H1 / A",
        ["1", "0", "0"],
        [
            "(y^2+z^2-x^2)/(4*z)*(u_x^2-u_y^2-u_z^2) - (x*y*u_x*u_y+x*z*u_x*u_z)/z + (y^2+z^2-x^2)/(4*z^2)*F(u)",
            "x*y/(2*z)*(u_x^2-u_y^2+u_z^2) + (y^2+z^2-x^2)/(2*z)*u_x*u_y - x*z*u_y*u_z - x*y/(2*z^2)*F(u)",
            "x/2*(u_x^2+u_y^2-u_z^2)*(y^2+z^2-x^2)/(2*z)*u_x*u_z - x*y*u_y*u_z - x/(2*z)*F(u)",
        ],
        Some("A3 has no operator between its first two terms; the table does not belong to H1"),
    ),
    arb(
        "hyperbolic3",
        "H5 / E",
        ["(x^2-y^2-z^2)/2", "x*y", "x*z"],
        [
            "(u_y^2+u_z^2-u_x^2)/(2*z) - F(u)/(2*z^2)",
            "-u_x*u_y/z",
            "-u_x*u_z/z",
        ],
        Some("gradient terms are those of the H1 current; F carries 1/(2z^2) instead of 1/z^3"),
    ),
    // Sphere.
    arb(
        "sphere3",
        "S4 / D",
        ["y", "-x", "0"],
        [
            "(2*y*(u_y^2+u_z^2-u_x^2) - 4*x*u_x*u_y)/(1+x^2+y^2+z^2)^2 - 8*y/(1+x^2+y^2+z^2)^3*F(u)",
            "(-2*x*(u_x^2-u_y^2+u_z^2) - 4*y*u_x*u_y)/(1+x^2+y^2+z^2)^2 + 8*x/(1+x^2+y^2+z^2)^3*F(u)",
            "(4*x*u_y*u_z - 4*y*u_x*u_z)/(1+x^2+y^2+z^2)^2",
        ],
        Some("gradient terms carry (1+r^2)^-2 where sqrt(g) g^ij is 2(1+r^2)^-1, and the cross terms have the wrong sign"),
    ),
    harmonic_b(
        "sphere3",
        "S8 / J",
        "1",
        [
            "u_x/(1+x^2+y^2+z^2)",
            "u_y/(1+x^2+y^2+z^2)",
            "u_z/(1+x^2+y^2+z^2)",
        ],
        Some("missing the factor 2 of sqrt(g) g^ij"),
    ),
    // Sol.
    arb(
        "sol",
        "So1 / A",
        ["1", "-y", "z"],
        [
            "(exp(-2*x)*u_y^2+exp(2*x)*u_z^2-u_x^2)/2 + y*u_x*u_y - z*u_x*u_z - F(u)",
            "(y*u_x^2+y*exp(2*x)*u_z^2-y*exp(-2*x)*u_y^2)/2 - exp(-2*x)*u_x*u_y - exp(-2*x)*z*u_x*u_z + y*F(u)",
            "z/2*(u_x^2+exp(-2*x)*u_y^2+exp(2*x)*u_z^2) - exp(2*x)*u_x*u_z + exp(2*x)*y*u_y*u_z \
             - exp(2*x)*z*u_y*u_z + y*F(u)",
        ],
        Some("A2 has the opposite sign on its first bracket and u_x u_z for u_y u_z; A3 has the wrong u_z^2 and F terms"),
    ),
    arb(
        "sol",
        "So2 / B",
        ["0", "1", "0"],
        [
            "-u_x*u_y",
            "(u_x^2-exp(-2*x)*u_y^2+exp(2*x)*u_z^2)/2 - F(u)",
            "-exp(2*x)*u_y*u_z",
        ],
        None,
    ),
    arb(
        "sol",
        "So3 / C",
        ["0", "0", "1"],
        [
            "-u_x*u_z",
            "-exp(-2*x)*u_y*u_z",
            "(u_x^2+exp(-2*x)*u_y^2-exp(2*x)*u_z^2)/2 - F(u)",
        ],
        None,
    ),
    harmonic_b(
        "sol",
        "Soinf / S (b = x)",
        "x",
        ["x*u_x - u", "exp(-2*x)*x*u_y", "exp(2*x)*x*u_z"],
        None,
    ),
    // S2 x R.
    arb(
        "s2xr",
        "S'4 / D",
        ["0", "0", "1"],
        [
            "-u_x*u_z",
            "-u_y*u_z",
            "(u_x^2+u_y^2)/2 - u_z^2/(2*(1+x^2+y^2)^2) - F(u)/(1+x^2+y^2)^2",
        ],
        Some("written for the metric without the factor 4 on the sphere"),
    ),
    harmonic_b(
        "s2xr",
        "S'inf / E (b = z)",
        "z",
        ["z*u_x", "z*u_y", "(z*u_z - u)/(1+x^2+y^2)^2"],
        Some("written for the metric without the factor 4 on the sphere"),
    ),
    // H2 x R.
    arb(
        "h2xr",
        "X1 / A",
        ["(x^2-y^2)/2", "x*y", "0"],
        [
            "(x^2-y^2)/4*(u_y^2-u_x^2) + (x^2-y^2)/(4*y^2)*u_z^2 - x*y*u_x*u_y - (x^2-y^2)/(2*y^2)*F(u)",
            "x*y/2*(u_x^2-u_y^2) + x/(2*y)*u_z^2 - (x^2-y^2)/2*u_x*u_y - x/y*F(u)",
            "-(x^2-y^2)/(2*y^2)*u_x*u_z - x/y*u_y*u_z",
        ],
        None,
    ),
    arb(
        "h2xr",
        "X2 / B",
        ["1", "0", "0"],
        ["(u_y^2-u_x^2)/2 + u_z^2/(2*y^2) - F(u)/y^2", "-u_x*u_y", "-u_x*u_z"],
        Some("B3 is missing the factor 1/y^2"),
    ),
    arb(
        "h2xr",
        "X3 / C",
        ["x", "y", "0"],
        [
            "x/2*(u_y^2-u_x^2) + x/(2*y^2)*u_z^2 - y*u_x*u_y - x/y^2*F(u)",
            "y/2*(u_x^2-u_y^2) + u_z^2/(2*y^2) - x*u_x*u_y + F(u)/y",
            "-x/y^2*u_x*u_z + u_y*u_z/y",
        ],
        Some("C2 has u_z^2/(2y^2) and +F/y for u_z^2/(2y) and -F/y; C3 has the wrong sign on u_y u_z"),
    ),
    arb(
        "h2xr",
        "X4 / D",
        ["0", "0", "1"],
        ["-u_x*u_z", "-u_y*u_z", "(u_x^2+u_y^2)/2 - u_z^2/(2*y^2) - F(u)/y^2"],
        None,
    ),
    harmonic_b("h2xr", "Xinf / E (b = x)", "x", ["x*u_x - u", "x*u_y", "x*u_z/y^2"], None),
    // Universal cover of SL2.
    arb(
        "sl2tilde",
        "X1 / A",
        ["1", "0", "0"],
        ["-u_x^2/z^2 + u_y^2/2 + u_y^2/2 - F(u)/z^2", "u_x^2/z - u_x*u_y", "-u_x*u_z"],
        Some("A1 repeats u_y^2/2 where u_z^2/2 belongs"),
    ),
    arb(
        "sl2tilde",
        "X2 / B",
        ["0", "1", "0"],
        [
            "-2/z^2*u_x*u_y + u_y^2/z",
            "u_x^2/z^2 - u_y^2/2 + u_z^2/2 - F(u)/z^2",
            "-u_y*u_z",
        ],
        None,
    ),
    harmonic_b(
        "sl2tilde",
        "Xinf / E (b = x)",
        "x",
        ["2/z^2*(x*u_x - u) - x*u_y/z", "-(x*u_x - u)/z + x*u_y", "x*u_z"],
        None,
    ),
    // Heisenberg group, coordinates (x, y, t).
    arb(
        "heisenberg",
        "T / A",
        ["0", "0", "1"],
        [
            "-u_x*u_t - 2*y*u_t^2",
            "-u_y*u_t + 2*x*u_t^2",
            "(u_x^2+u_y^2)/2 - (4*(x^2+y^2)+1)/2*u_t^2 - F(u)",
        ],
        None,
    ),
    arb(
        "heisenberg",
        "Xt / B",
        ["1", "0", "-2*y"],
        [
            "(u_y^2-u_x^2)/2 + +2*y*u_x*u_t - 2*x*u_y*u_t + (4*(x^2+3*y^2)+1)/2*u_t^2 - F(u)",
            "-u_x*u_y - 2*y*u_y*u_t + 2*x*u_x*u_t - 4*x*y*u_t^2",
            "-3*y*u_x^2 - y*u_y^2 + 2*x*u_x*u_y + y*(4*(x^2+y^2)+1)*u_t^2 - (4*(x^2+y^2)+1)*u_x*u_t + 2*y*F(u)",
        ],
        Some("B1 prints a doubled plus sign and does not parse as printed; B2 has the wrong sign on 2y u_y u_t"),
    ),
    arb(
        "heisenberg",
        "R / D",
        ["y", "-x", "0"],
        [
            "-y/2*(u_y^2-u_x^2) + y/2*(4*(x^2+y^2)+1)*u_t^2 + x*u_x*u_y - y*F(u)",
            "-x/2*(u_y^2-u_x^2) - x/2*(4*(x^2+y^2)+1)*u_t^2 - y*u_x*u_y + x*F(u)",
            "-2*y^2*u_x^2 - 2*x^2*u_y^2 + 4*x*y*u_x*u_y - y*(4*(x^2+y^2)+1)*u_x*u_t + x*(4*(x^2+y^2)+1)*u_y*u_t",
        ],
        Some("D1 and D2 have the wrong sign on their (u_y^2 - u_x^2) terms"),
    ),
    harmonic_b(
        "heisenberg",
        "Hinf / E (b = x)",
        "x",
        [
            "x*(u_x+2*y*u_t) - u*(1+2*y*u_t)",
            "x*(u_y-2*x*u_t) - u*(-2*x*u_t)",
            "x*(2*y*u_x-2*x*u_y+(4*(x^2+y^2)+1)*u_t) - u*(2*y)",
        ],
        Some("E1 and E2 print u_t inside the b-bracket where b_t belongs"),
    ),
];
