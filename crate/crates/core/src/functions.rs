//! The node function set: mathematical, statistical, comparison, list
//! processing and miscellaneous functions, each overloaded for the four
//! scalar/matrix operand shapes.
//!
//! Every function is total. Numerical hazards (division by zero, undefined
//! moments of constant data, out-of-domain inverse trigonometry) produce
//! non-finite intermediates which [`apply`] turns into 0.

use std::f64::consts::{E, PI};
use std::fmt;

use crate::value::{
    constrain_element, crop_to_common, index_from_unit, scalar_of, unit_from_signed, Matrix, Value,
};

/// Number of functions in the set.
pub const FUNCTION_COUNT: usize = 53;

/// Longest vector PUSH_BACK / PUSH_FRONT may build; longer results keep
/// their leading elements. Without a cap, chained concatenations grow
/// exponentially with graph depth, or every frame through a recurrent
/// connection.
pub const MAX_CONCAT_LEN: usize = 1 << 16;

/// A node function. Discriminants are the canonical gene-decoding ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Function {
    // mathematical
    Add = 0,
    AMinus,
    Mult,
    CMult,
    Inv,
    Abs,
    Sqrt,
    CPow,
    YPow,
    ExpX,
    SinX,
    SqrtXY,
    Acos,
    Asin,
    Atan,
    // statistical
    StdDev,
    Skew,
    Kurtosis,
    Mean,
    Range,
    Round,
    Ceil,
    Floor,
    Max1,
    Min1,
    // comparison
    Lt,
    Gt,
    Max2,
    Min2,
    // list processing
    SplitBefore,
    SplitAfter,
    RangeIn,
    IndexY,
    IndexP,
    Vectorize,
    First,
    Last,
    Differences,
    AvgDifferences,
    Rotate,
    Reverse,
    PushBack,
    PushFront,
    Set,
    Sum,
    Transpose,
    VecFromDouble,
    // miscellaneous
    YWire,
    Nop,
    Const,
    ConstVectorD,
    Zeros,
    Ones,
}

use Function::*;

impl Function {
    /// All functions in id order.
    pub const ALL: [Function; FUNCTION_COUNT] = [
        Add,
        AMinus,
        Mult,
        CMult,
        Inv,
        Abs,
        Sqrt,
        CPow,
        YPow,
        ExpX,
        SinX,
        SqrtXY,
        Acos,
        Asin,
        Atan,
        StdDev,
        Skew,
        Kurtosis,
        Mean,
        Range,
        Round,
        Ceil,
        Floor,
        Max1,
        Min1,
        Lt,
        Gt,
        Max2,
        Min2,
        SplitBefore,
        SplitAfter,
        RangeIn,
        IndexY,
        IndexP,
        Vectorize,
        First,
        Last,
        Differences,
        AvgDifferences,
        Rotate,
        Reverse,
        PushBack,
        PushFront,
        Set,
        Sum,
        Transpose,
        VecFromDouble,
        YWire,
        Nop,
        Const,
        ConstVectorD,
        Zeros,
        Ones,
    ];

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Option<Function> {
        Self::ALL.get(id).copied()
    }

    /// Decodes a function gene in `[0, 1)` as `⌊gene · 53⌋`.
    pub fn from_gene(gene: f64) -> Function {
        let id = ((gene * FUNCTION_COUNT as f64).floor().max(0.0) as usize).min(FUNCTION_COUNT - 1);
        Self::ALL[id]
    }

    pub fn name(self) -> &'static str {
        match self {
            Add => "ADD",
            AMinus => "AMINUS",
            Mult => "MULT",
            CMult => "CMULT",
            Inv => "INV",
            Abs => "ABS",
            Sqrt => "SQRT",
            CPow => "CPOW",
            YPow => "YPOW",
            ExpX => "EXPX",
            SinX => "SINX",
            SqrtXY => "SQRTXY",
            Acos => "ACOS",
            Asin => "ASIN",
            Atan => "ATAN",
            StdDev => "STDDEV",
            Skew => "SKEW",
            Kurtosis => "KURTOSIS",
            Mean => "MEAN",
            Range => "RANGE",
            Round => "ROUND",
            Ceil => "CEIL",
            Floor => "FLOOR",
            Max1 => "MAX1",
            Min1 => "MIN1",
            Lt => "LT",
            Gt => "GT",
            Max2 => "MAX2",
            Min2 => "MIN2",
            SplitBefore => "SPLIT_BEFORE",
            SplitAfter => "SPLIT_AFTER",
            RangeIn => "RANGE_IN",
            IndexY => "INDEX_Y",
            IndexP => "INDEX_P",
            Vectorize => "VECTORIZE",
            First => "FIRST",
            Last => "LAST",
            Differences => "DIFFERENCES",
            AvgDifferences => "AVG_DIFFERENCES",
            Rotate => "ROTATE",
            Reverse => "REVERSE",
            PushBack => "PUSH_BACK",
            PushFront => "PUSH_FRONT",
            Set => "SET",
            Sum => "SUM",
            Transpose => "TRANSPOSE",
            VecFromDouble => "VECFROMDOUBLE",
            YWire => "YWIRE",
            Nop => "NOP",
            Const => "CONST",
            ConstVectorD => "CONSTVECTORD",
            Zeros => "ZEROS",
            Ones => "ONES",
        }
    }

    pub fn from_name(name: &str) -> Option<Function> {
        Self::ALL.iter().copied().find(|f| f.name() == name)
    }

    /// Arity as listed in the function tables. YWIRE is listed with arity 1
    /// although it reads its `y` operand; see [`Function::reads_y`].
    pub fn arity(self) -> usize {
        match self {
            Const => 0,
            Add | AMinus | Mult | YPow | SqrtXY | Lt | Gt | Max2 | Min2 | RangeIn | IndexY
            | PushBack | PushFront | Set => 2,
            _ => 1,
        }
    }

    /// Whether the scalar formula is applied element-wise to matrices.
    pub fn broadcasting(self) -> bool {
        self.id() <= Atan.id() || matches!(self, Lt | Gt | Max2 | Min2)
    }

    /// Functions that only process matrix `x` and act as a wire on scalar `x`.
    pub fn requires_matrix(self) -> bool {
        !self.broadcasting()
            && !matches!(
                self,
                PushBack | PushFront | Set | VecFromDouble | YWire | Nop | Const
            )
    }

    /// Whether the node's `x` connection is read.
    pub fn reads_x(self) -> bool {
        self.arity() >= 1 && self != YWire
    }

    /// Whether the node's `y` connection is read.
    pub fn reads_y(self) -> bool {
        self.arity() == 2 || self == YWire
    }
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evaluates `f` on `(x, y)` with parameter `p`, weights the result by `p`
/// element-wise, and constrains it.
pub fn apply(f: Function, x: &Value, y: &Value, p: f64) -> Value {
    raw(f, x, y, p).map(|e| constrain_element(p * e))
}

/// The unweighted, unconstrained function result.
pub fn raw(f: Function, x: &Value, y: &Value, p: f64) -> Value {
    if f.requires_matrix() {
        return match x {
            Value::Scalar(_) => x.clone(),
            Value::Matrix(m) => matrix_only(f, m, y, p),
        };
    }
    match f {
        Add => binary(x, y, |a, b| (a + b) / 2.0),
        AMinus => binary(x, y, |a, b| (a - b).abs() / 2.0),
        Mult => binary(x, y, |a, b| a * b),
        CMult => x.map(|a| a * p),
        Inv => x.map(|a| 1.0 / a),
        Abs => x.map(f64::abs),
        Sqrt => x.map(|a| a.abs().sqrt()),
        CPow => x.map(|a| a.abs().powf(p + 1.0)),
        YPow => binary(x, y, |a, b| a.abs().powf(b.abs())),
        ExpX => x.map(|a| (a.exp() - 1.0) / (E - 1.0)),
        SinX => x.map(f64::sin),
        SqrtXY => binary(x, y, |a, b| (a * a + b * b).sqrt() / 2.0f64.sqrt()),
        Acos => x.map(|a| a.acos() / PI),
        Asin => x.map(|a| 2.0 * a.asin() / PI),
        Atan => x.map(|a| 4.0 * a.atan() / PI),
        Lt => binary(x, y, |a, b| indicator(a < b)),
        Gt => binary(x, y, |a, b| indicator(a > b)),
        Max2 => binary(x, y, f64::max),
        Min2 => binary(x, y, f64::min),
        PushBack => concat(x, y),
        PushFront => concat(y, x),
        Set => match (x, y) {
            (Value::Scalar(s), Value::Matrix(m)) => Matrix::filled(m.rows(), m.cols(), *s).into(),
            (Value::Matrix(m), Value::Scalar(s)) => Matrix::filled(m.rows(), m.cols(), *s).into(),
            _ => x.clone(),
        },
        VecFromDouble => match x {
            Value::Scalar(s) => Matrix::row(vec![*s]).into(),
            Value::Matrix(_) => x.clone(),
        },
        YWire => y.clone(),
        Nop => x.clone(),
        Const => Value::Scalar(p),
        _ => unreachable!("{f} handled by matrix_only"),
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn binary(x: &Value, y: &Value, g: impl Fn(f64, f64) -> f64) -> Value {
    match (x, y) {
        (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(g(*a, *b)),
        (Value::Scalar(a), Value::Matrix(m)) => m.map(|e| g(*a, e)).into(),
        (Value::Matrix(m), Value::Scalar(b)) => m.map(|e| g(e, *b)).into(),
        (Value::Matrix(a), Value::Matrix(b)) => {
            let (a, b) = crop_to_common(a, b);
            let data = a
                .as_slice()
                .iter()
                .zip(b.as_slice())
                .map(|(&u, &v)| g(u, v))
                .collect();
            Matrix::new(a.rows(), a.cols(), data).into()
        }
    }
}

fn concat(first: &Value, second: &Value) -> Value {
    let mut data = Vec::with_capacity(first.elements().len() + second.elements().len());
    data.extend_from_slice(first.elements());
    data.extend_from_slice(second.elements());
    data.truncate(MAX_CONCAT_LEN);
    Matrix::row(data).into()
}

/// Row-major slice `[lo..=hi]` as a row vector.
fn slice_row(m: &Matrix, lo: usize, hi: usize) -> Value {
    Matrix::row(m.as_slice()[lo..=hi].to_vec()).into()
}

fn differences(m: &Matrix) -> Option<Vec<f64>> {
    let e = m.as_slice();
    if e.len() < 2 {
        return None;
    }
    Some(e.windows(2).map(|w| w[1] - w[0]).collect())
}

fn central_moment(e: &[f64], mean: f64, power: i32) -> f64 {
    let mut acc = 0.0;
    for &v in e {
        acc += (v - mean).powi(power);
    }
    acc / e.len() as f64
}

fn matrix_only(f: Function, m: &Matrix, y: &Value, p: f64) -> Value {
    let e = m.as_slice();
    let len = e.len();
    let scalar = |s: f64| Value::Scalar(s);
    match f {
        StdDev => {
            let mean = m.mean();
            let mut ss = 0.0;
            for &v in e {
                ss += (v - mean) * (v - mean);
            }
            scalar((ss / (len as f64 - 1.0)).sqrt())
        }
        Skew => {
            let mean = m.mean();
            let m2 = central_moment(e, mean, 2);
            let m3 = central_moment(e, mean, 3);
            scalar(m3 / m2.powf(1.5))
        }
        Kurtosis => {
            let mean = m.mean();
            let m2 = central_moment(e, mean, 2);
            let m4 = central_moment(e, mean, 4);
            scalar(m4 / (m2 * m2) - 3.0)
        }
        Mean => scalar(m.mean()),
        Range => {
            let max = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = e.iter().copied().fold(f64::INFINITY, f64::min);
            scalar(max - min - 1.0)
        }
        Round => m.map(f64::round_ties_even).into(),
        Ceil => m.map(f64::ceil).into(),
        Floor => m.map(f64::floor).into(),
        Max1 => scalar(e.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        Min1 => scalar(e.iter().copied().fold(f64::INFINITY, f64::min)),
        SplitBefore => {
            let i = index_from_unit(unit_from_signed(p), len);
            slice_row(m, 0, i)
        }
        SplitAfter => {
            let i = index_from_unit(unit_from_signed(p), len);
            slice_row(m, i, len - 1)
        }
        RangeIn => {
            let a = index_from_unit(unit_from_signed(scalar_of(y)), len);
            let b = index_from_unit(unit_from_signed(p), len);
            slice_row(m, a.min(b), a.max(b))
        }
        IndexY => scalar(e[index_from_unit(unit_from_signed(scalar_of(y)), len)]),
        IndexP => scalar(e[index_from_unit(unit_from_signed(p), len)]),
        Vectorize => Matrix::row(e.to_vec()).into(),
        First => scalar(e[0]),
        Last => scalar(e[len - 1]),
        Differences => match differences(m) {
            Some(d) => Matrix::row(d).into(),
            None => scalar(0.0),
        },
        AvgDifferences => match differences(m) {
            Some(d) => scalar(Matrix::row(d).mean()),
            None => scalar(0.0),
        },
        Rotate => {
            let shift = (p * len as f64).floor() as i64;
            let mut out = vec![0.0; len];
            for (i, &v) in e.iter().enumerate() {
                let j = (i as i64 + shift).rem_euclid(len as i64) as usize;
                out[j] = v;
            }
            Matrix::new(m.rows(), m.cols(), out).into()
        }
        Reverse => {
            let out = e.iter().rev().copied().collect();
            Matrix::new(m.rows(), m.cols(), out).into()
        }
        Sum => {
            let mut s = 0.0;
            for &v in e {
                s += v;
            }
            scalar(s)
        }
        Transpose => m.transpose().into(),
        ConstVectorD => Matrix::filled(m.rows(), m.cols(), p).into(),
        Zeros => Matrix::filled(m.rows(), m.cols(), 0.0).into(),
        Ones => Matrix::filled(m.rows(), m.cols(), 1.0).into(),
        _ => unreachable!("{f} does not require matrix input"),
    }
}
