// Shared helpers for the integration tests. Each test binary uses a
// different subset.
#![allow(dead_code)]

use std::collections::HashMap;

use cgp_core::functions::{Function, MAX_CONCAT_LEN};
use cgp_core::{Genome, Matrix, Value};
use rand::Rng;

pub const NAMES: [&str; 53] = [
    "ADD",
    "AMINUS",
    "MULT",
    "CMULT",
    "INV",
    "ABS",
    "SQRT",
    "CPOW",
    "YPOW",
    "EXPX",
    "SINX",
    "SQRTXY",
    "ACOS",
    "ASIN",
    "ATAN",
    "STDDEV",
    "SKEW",
    "KURTOSIS",
    "MEAN",
    "RANGE",
    "ROUND",
    "CEIL",
    "FLOOR",
    "MAX1",
    "MIN1",
    "LT",
    "GT",
    "MAX2",
    "MIN2",
    "SPLIT_BEFORE",
    "SPLIT_AFTER",
    "RANGE_IN",
    "INDEX_Y",
    "INDEX_P",
    "VECTORIZE",
    "FIRST",
    "LAST",
    "DIFFERENCES",
    "AVG_DIFFERENCES",
    "ROTATE",
    "REVERSE",
    "PUSH_BACK",
    "PUSH_FRONT",
    "SET",
    "SUM",
    "TRANSPOSE",
    "VECFROMDOUBLE",
    "YWIRE",
    "NOP",
    "CONST",
    "CONSTVECTORD",
    "ZEROS",
    "ONES",
];

/// Reference value: a scalar or a list of equal-length rows.
#[derive(Clone, Debug)]
pub enum R {
    S(f64),
    M(Vec<Vec<f64>>),
}

impl R {
    fn flat(&self) -> Vec<f64> {
        match self {
            R::S(s) => vec![*s],
            R::M(rows) => rows.iter().flatten().copied().collect(),
        }
    }

    fn map(&self, g: impl Fn(f64) -> f64) -> R {
        match self {
            R::S(s) => R::S(g(*s)),
            R::M(rows) => R::M(
                rows.iter()
                    .map(|r| r.iter().map(|&e| g(e)).collect())
                    .collect(),
            ),
        }
    }
}

pub fn to_r(v: &Value) -> R {
    match v {
        Value::Scalar(s) => R::S(*s),
        Value::Matrix(m) => R::M(
            (0..m.rows())
                .map(|r| (0..m.cols()).map(|c| m.get(r, c)).collect())
                .collect(),
        ),
    }
}

pub fn to_value(r: &R) -> Value {
    match r {
        R::S(s) => Value::Scalar(*s),
        R::M(rows) => Matrix::new(rows.len(), rows[0].len(), rows.concat()).into(),
    }
}

/// Shape and bit pattern equality.
pub fn identical(a: &R, b: &R) -> bool {
    match (a, b) {
        (R::S(x), R::S(y)) => x.to_bits() == y.to_bits(),
        (R::M(x), R::M(y)) => {
            x.len() == y.len()
                && x.iter().zip(y).all(|(p, q)| {
                    p.len() == q.len() && p.iter().zip(q).all(|(u, v)| u.to_bits() == v.to_bits())
                })
        }
        _ => false,
    }
}

fn sum(v: &[f64]) -> f64 {
    let mut s = 0.0;
    for &e in v {
        s += e;
    }
    s
}

fn mean(v: &[f64]) -> f64 {
    sum(v) / v.len() as f64
}

fn scalarize(v: &R) -> f64 {
    match v {
        R::S(s) => *s,
        R::M(_) => mean(&v.flat()),
    }
}

/// Position of signed fraction `g` in a list of `len` elements.
fn position(g: f64, len: usize) -> usize {
    let k = ((g + 1.0) / 2.0 * len as f64).floor();
    if k >= len as f64 {
        len - 1
    } else if k > 0.0 {
        k as usize
    } else {
        0
    }
}

fn row(v: Vec<f64>) -> R {
    R::M(vec![v])
}

fn reshape(v: &[f64], cols: usize) -> R {
    R::M(v.chunks(cols).map(|c| c.to_vec()).collect())
}

fn pairwise(x: &R, y: &R, g: impl Fn(f64, f64) -> f64) -> R {
    match (x, y) {
        (R::S(a), R::S(b)) => R::S(g(*a, *b)),
        (R::S(a), m @ R::M(_)) => m.map(|e| g(*a, e)),
        (m @ R::M(_), R::S(b)) => m.map(|e| g(e, *b)),
        (R::M(a), R::M(b)) => {
            let rows = a.len().min(b.len());
            let cols = a[0].len().min(b[0].len());
            R::M(
                (0..rows)
                    .map(|r| (0..cols).map(|c| g(a[r][c], b[r][c])).collect())
                    .collect(),
            )
        }
    }
}

fn fill_like(m: &[Vec<f64>], v: f64) -> R {
    R::M(vec![vec![v; m[0].len()]; m.len()])
}

fn moment(v: &[f64], mu: f64, k: i32) -> f64 {
    let mut acc = 0.0;
    for &e in v {
        acc += (e - mu).powi(k);
    }
    acc / v.len() as f64
}

fn list_function(name: &str, m: &[Vec<f64>], y: &R, p: f64) -> R {
    let whole = R::M(m.to_vec());
    let v = whole.flat();
    let n = v.len();
    let cols = m[0].len();
    let largest = v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let smallest = v.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let diffs: Vec<f64> = (1..n).map(|i| v[i] - v[i - 1]).collect();
    match name {
        "STDDEV" => {
            let mu = mean(&v);
            let mut ss = 0.0;
            for &e in &v {
                ss += (e - mu) * (e - mu);
            }
            R::S((ss / (n as f64 - 1.0)).sqrt())
        }
        "SKEW" => {
            let mu = mean(&v);
            R::S(moment(&v, mu, 3) / moment(&v, mu, 2).powf(1.5))
        }
        "KURTOSIS" => {
            let mu = mean(&v);
            let m2 = moment(&v, mu, 2);
            R::S(moment(&v, mu, 4) / (m2 * m2) - 3.0)
        }
        "MEAN" => R::S(mean(&v)),
        "RANGE" => R::S(largest - smallest - 1.0),
        "ROUND" => whole.map(|e| e.round_ties_even()),
        "CEIL" => whole.map(f64::ceil),
        "FLOOR" => whole.map(f64::floor),
        "MAX1" => R::S(largest),
        "MIN1" => R::S(smallest),
        "SPLIT_BEFORE" => row(v[..=position(p, n)].to_vec()),
        "SPLIT_AFTER" => row(v[position(p, n)..].to_vec()),
        "RANGE_IN" => {
            let a = position(scalarize(y), n);
            let b = position(p, n);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            row(v[lo..=hi].to_vec())
        }
        "INDEX_Y" => R::S(v[position(scalarize(y), n)]),
        "INDEX_P" => R::S(v[position(p, n)]),
        "VECTORIZE" => row(v),
        "FIRST" => R::S(v[0]),
        "LAST" => R::S(v[n - 1]),
        "DIFFERENCES" if n < 2 => R::S(0.0),
        "DIFFERENCES" => row(diffs),
        "AVG_DIFFERENCES" if n < 2 => R::S(0.0),
        "AVG_DIFFERENCES" => R::S(mean(&diffs)),
        "ROTATE" => {
            let k = (p * n as f64).floor() as i64;
            let mut out = vec![0.0; n];
            for (i, &e) in v.iter().enumerate() {
                out[(i as i64 + k).rem_euclid(n as i64) as usize] = e;
            }
            reshape(&out, cols)
        }
        "REVERSE" => {
            let out: Vec<f64> = v.iter().rev().copied().collect();
            reshape(&out, cols)
        }
        "SUM" => R::S(sum(&v)),
        "TRANSPOSE" => R::M(
            (0..cols)
                .map(|c| m.iter().map(|r| r[c]).collect())
                .collect(),
        ),
        "CONSTVECTORD" => fill_like(m, p),
        "ZEROS" => fill_like(m, 0.0),
        "ONES" => fill_like(m, 1.0),
        other => panic!("{other} is not a list function"),
    }
}

fn joined(first: &R, second: &R) -> R {
    let mut v = first.flat();
    v.extend(second.flat());
    v.truncate(MAX_CONCAT_LEN);
    row(v)
}

/// Independent reference for node function `id`, including the `p` weight
/// and the final clamp.
pub fn reference(id: usize, x: &R, y: &R, p: f64) -> R {
    let one = |g: &dyn Fn(f64) -> f64| x.map(g);
    let raw = match NAMES[id] {
        "ADD" => pairwise(x, y, |a, b| (a + b) / 2.0),
        "AMINUS" => pairwise(x, y, |a, b| (a - b).abs() / 2.0),
        "MULT" => pairwise(x, y, |a, b| a * b),
        "CMULT" => one(&|a| a * p),
        "INV" => one(&|a| 1.0 / a),
        "ABS" => one(&|a| a.abs()),
        "SQRT" => one(&|a| a.abs().sqrt()),
        "CPOW" => one(&|a| a.abs().powf(p + 1.0)),
        "YPOW" => pairwise(x, y, |a, b| a.abs().powf(b.abs())),
        "EXPX" => one(&|a| (a.exp() - 1.0) / (std::f64::consts::E - 1.0)),
        "SINX" => one(&|a| a.sin()),
        "SQRTXY" => pairwise(x, y, |a, b| {
            (a * a + b * b).sqrt() / std::f64::consts::SQRT_2
        }),
        "ACOS" => one(&|a| a.acos() / std::f64::consts::PI),
        "ASIN" => one(&|a| 2.0 * a.asin() / std::f64::consts::PI),
        "ATAN" => one(&|a| 4.0 * a.atan() / std::f64::consts::PI),
        "LT" => pairwise(x, y, |a, b| if a < b { 1.0 } else { 0.0 }),
        "GT" => pairwise(x, y, |a, b| if a > b { 1.0 } else { 0.0 }),
        "MAX2" => pairwise(x, y, f64::max),
        "MIN2" => pairwise(x, y, f64::min),
        "PUSH_BACK" => joined(x, y),
        "PUSH_FRONT" => joined(y, x),
        "SET" => match (x, y) {
            (R::S(s), R::M(m)) => fill_like(m, *s),
            (R::M(m), R::S(s)) => fill_like(m, *s),
            _ => x.clone(),
        },
        "VECFROMDOUBLE" => match x {
            R::S(s) => row(vec![*s]),
            m => m.clone(),
        },
        "YWIRE" => y.clone(),
        "NOP" => x.clone(),
        "CONST" => R::S(p),
        name => match x {
            R::S(_) => x.clone(),
            R::M(m) => list_function(name, m, y, p),
        },
    };
    raw.map(|e| {
        let w = p * e;
        if w.is_nan() || w.is_infinite() {
            0.0
        } else {
            w.clamp(-1.0, 1.0)
        }
    })
}

const SPECIAL: [f64; 7] = [0.0, 1.0, -1.0, 0.5, -0.5, 1e-300, -0.25];

fn element<G: Rng>(rng: &mut G) -> f64 {
    if rng.gen_bool(0.15) {
        SPECIAL[rng.gen_range(0..SPECIAL.len())]
    } else {
        rng.gen_range(-1.0..=1.0)
    }
}

/// A constrained operand; matrices are 1×1 up to 6×6, sometimes constant.
pub fn random_operand<G: Rng>(rng: &mut G, matrix: bool) -> R {
    if !matrix {
        return R::S(element(rng));
    }
    let rows = rng.gen_range(1..=6);
    let cols = rng.gen_range(1..=6);
    if rng.gen_bool(0.05) {
        let v = element(rng);
        return R::M(vec![vec![v; cols]; rows]);
    }
    R::M(
        (0..rows)
            .map(|_| (0..cols).map(|_| element(rng)).collect())
            .collect(),
    )
}

pub fn random_param<G: Rng>(rng: &mut G) -> f64 {
    element(rng)
}

/// Compares `functions::apply` with [`reference`] on `cases` random
/// inputs spread evenly over the four operand shapes. Returns the number of
/// mismatches and the first one found.
pub fn check_function<G: Rng>(id: usize, cases: usize, rng: &mut G) -> (usize, Option<String>) {
    let f = Function::from_id(id).unwrap();
    let mut mismatches = 0;
    let mut first = None;
    for case in 0..cases {
        let x = random_operand(rng, case % 4 >= 2);
        let y = random_operand(rng, case % 2 == 1);
        let p = random_param(rng);
        let got = to_r(&cgp_core::functions::apply(
            f,
            &to_value(&x),
            &to_value(&y),
            p,
        ));
        let want = reference(id, &x, &y, p);
        if !identical(&got, &want) {
            mismatches += 1;
            if first.is_none() {
                first = Some(format!(
                    "{} x={x:?} y={y:?} p={p}: got {got:?}, want {want:?}",
                    NAMES[id]
                ));
            }
        }
    }
    (mismatches, first)
}

/// What each function reads: (x, y).
fn operands(name: &str) -> (bool, bool) {
    match name {
        "CONST" => (false, false),
        "YWIRE" => (false, true),
        "ADD" | "AMINUS" | "MULT" | "YPOW" | "SQRTXY" | "LT" | "GT" | "MAX2" | "MIN2"
        | "RANGE_IN" | "INDEX_Y" | "PUSH_BACK" | "PUSH_FRONT" | "SET" => (true, true),
        _ => (true, false),
    }
}

/// Feed-forward reference evaluation straight from the gene vector by
/// memoized recursion from each output. Only valid for `r = 0`.
pub fn recursive_outputs(genome: &Genome, inputs: &[Value]) -> Vec<R> {
    assert_eq!(genome.recurrency(), 0.0);
    let genes = genome.genes();
    let n_in = genome.n_input();
    let n_out = genome.n_output();
    let total = n_in + genome.columns();
    let mut memo: HashMap<usize, R> = HashMap::new();
    (0..n_out)
        .map(|o| {
            let node = ((genes[o] * total as f64).floor() as usize).min(total - 1);
            eval_node(node, genes, n_in, n_out, inputs, &mut memo)
        })
        .collect()
}

fn eval_node(
    node: usize,
    genes: &[f64],
    n_in: usize,
    n_out: usize,
    inputs: &[Value],
    memo: &mut HashMap<usize, R>,
) -> R {
    if let Some(v) = memo.get(&node) {
        return v.clone();
    }
    let value = if node < n_in {
        to_r(&inputs[node]).map(|e| {
            if e.is_finite() {
                e.clamp(-1.0, 1.0)
            } else {
                0.0
            }
        })
    } else {
        let g = &genes[n_out + 4 * (node - n_in)..][..4];
        let x_at = ((g[0] * node as f64).floor() as usize).min(node - 1);
        let y_at = ((g[1] * node as f64).floor() as usize).min(node - 1);
        let id = ((g[2] * 53.0).floor() as usize).min(52);
        let p = 2.0 * g[3] - 1.0;
        let (reads_x, reads_y) = operands(NAMES[id]);
        let x = if reads_x {
            eval_node(x_at, genes, n_in, n_out, inputs, memo)
        } else {
            R::S(0.0)
        };
        let y = if reads_y {
            eval_node(y_at, genes, n_in, n_out, inputs, memo)
        } else {
            R::S(0.0)
        };
        reference(id, &x, &y, p)
    };
    memo.insert(node, value.clone());
    value
}

/// Builds a genome node by node with exact connections, for `r = 0`.
pub struct GenomeBuilder {
    n_input: usize,
    nodes: Vec<(usize, usize, Function, f64)>,
}

/// Largest parameter gene below 1.
pub const P_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

impl GenomeBuilder {
    pub fn new(n_input: usize) -> Self {
        GenomeBuilder {
            n_input,
            nodes: Vec::new(),
        }
    }

    /// Appends a node and returns its graph index. `p_gene` is the raw gene.
    pub fn node(&mut self, f: Function, x: usize, y: usize, p_gene: f64) -> usize {
        let index = self.n_input + self.nodes.len();
        assert!(x < index && y < index);
        self.nodes.push((x, y, f, p_gene));
        index
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Pads to `columns` with filler nodes and writes the outputs.
    pub fn build(mut self, outputs: &[usize], columns: usize) -> Genome {
        while self.nodes.len() < columns {
            self.node(Function::Nop, 0, 0, 0.5);
        }
        let total = self.n_input + columns;
        let mut genes: Vec<f64> = outputs
            .iter()
            .map(|&o| (o as f64 + 0.5) / total as f64)
            .collect();
        for (k, &(x, y, f, p)) in self.nodes.iter().enumerate() {
            let span = (self.n_input + k) as f64;
            genes.extend([
                (x as f64 + 0.5) / span,
                (y as f64 + 0.5) / span,
                (f.id() as f64 + 0.5) / 53.0,
                p,
            ]);
        }
        let genome = Genome::new(self.n_input, outputs.len(), columns, 0.0, genes).unwrap();
        let program = genome.decode();
        for (k, &(x, y, f, _)) in self.nodes.iter().enumerate() {
            let node = program.node(self.n_input + k).unwrap();
            assert_eq!((node.x, node.y, node.function), (x, y, f));
        }
        assert_eq!(program.outputs(), outputs);
        genome
    }
}

/// Parameter gene whose CONST node outputs `v` (`v = p_n²`, `p_n ≥ 0`).
pub fn const_gene(v: f64) -> f64 {
    (v.sqrt() + 1.0) / 2.0
}

/// A Catch controller that steers the paddle under the ball.
///
/// Column weights `j/33` are built as a 12-long ramp, tiled to 144 and
/// dotted with the red (ball) and green (paddle) planes. The paddle sum
/// covers three cells and is divided by 3; GT and LT of the two then vote
/// left or right against a constant 0.49 for no-op.
pub fn catch_tracker() -> Genome {
    use Function::*;
    let mut b = GenomeBuilder::new(3);
    let consts: Vec<usize> = (0..12)
        .map(|j| b.node(Const, 0, 0, const_gene(j as f64 / 33.0)))
        .collect();
    let mut ramp = consts[0];
    for &c in &consts[1..] {
        ramp = b.node(PushBack, ramp, c, P_MAX);
    }
    let r24 = b.node(PushBack, ramp, ramp, P_MAX);
    let r48 = b.node(PushBack, r24, r24, P_MAX);
    let r96 = b.node(PushBack, r48, r48, P_MAX);
    let r144 = b.node(PushBack, r96, r48, P_MAX);
    let red = b.node(Vectorize, 0, 0, P_MAX);
    let green = b.node(Vectorize, 1, 1, P_MAX);
    let ball_w = b.node(Mult, red, r144, P_MAX);
    let paddle_w = b.node(Mult, green, r144, P_MAX);
    let ball = b.node(Sum, ball_w, 0, P_MAX);
    let paddle3 = b.node(Sum, paddle_w, 0, P_MAX);
    // p_n² = 1/3
    let paddle = b.node(CMult, paddle3, 0, ((1.0f64 / 3.0).sqrt() + 1.0) / 2.0);
    let noop = b.node(Const, 0, 0, const_gene(0.49));
    let left = b.node(Gt, paddle, ball, P_MAX);
    let right = b.node(Lt, paddle, ball, P_MAX);
    b.build(&[noop, left, right], 40)
}
