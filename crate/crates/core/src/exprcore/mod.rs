//! Symbolic expression kernel.

mod canon;
mod eval;
mod expr;
mod parse;
mod symbols;
mod zero;

pub use canon::{diff, normalize, qi, qr, CanonError, Kernel, Mono, Poly, RatFn, Q};
pub use eval::{eval_abs, eval_num, Env, EvalError};
pub use expr::{generic_name, generic_order, Expr, Func, Node, Symbol};
pub use parse::{parse, parse_rational, ParseError, ParseErrorKind};
pub use symbols::{SymbolError, SymbolKind, SymbolTable};
pub use zero::{is_zero, rat_is_zero, rat_report, zero_report, Verdict, ZeroReport, ZeroTestPolicy};
