//! Reverse-mode differentiation over small dense tensors.
//!
//! A [`Graph`] records one forward pass as a list of nodes in evaluation
//! order; [`Graph::backward`] walks it in reverse. Values are flat `f64`
//! buffers with a `(rows, cols)` shape; vectors are `(n, 1)`.

/// Handle to a node of a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    /// `W x`.
    MatVec(Var, Var),
    /// `W^T x`.
    MatTVec(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    /// Elementwise product.
    Mul(Var, Var),
    /// Elementwise quotient.
    Div(Var, Var),
    /// Scalar node times a tensor.
    ScalarMul(Var, Var),
    Scale(Var, f64),
    Tanh(Var),
    Square(Var),
    Sum(Var),
    Dot(Var, Var),
    Index(Var, usize),
    Concat(Vec<Var>),
    /// `rowsoftmax(u n^T / sqrt(d)) u`.
    Attention(Var, Var),
    /// Magnitude floored at `eps`, sign kept (zero maps to `+eps`).
    FloorMagnitude(Var, f64),
}

#[derive(Clone, Debug)]
struct Node {
    value: Vec<f64>,
    rows: usize,
    cols: usize,
    op: Op,
}

#[derive(Clone, Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

/// Gradients of one scalar output with respect to every node.
pub struct Gradients {
    grads: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> &[f64] {
        &self.grads[v.0]
    }
}

fn softmax_rows(u: &[f64], n: &[f64]) -> Vec<f64> {
    let d = u.len();
    let scale = 1.0 / (d as f64).sqrt();
    let mut s = vec![0.0; d * d];
    for i in 0..d {
        let row = &mut s[i * d..(i + 1) * d];
        for (j, r) in row.iter_mut().enumerate() {
            *r = u[i] * n[j] * scale;
        }
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for r in row.iter_mut() {
            *r = (*r - max).exp();
            z += *r;
        }
        for r in row.iter_mut() {
            *r /= z;
        }
    }
    s
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, value: Vec<f64>, rows: usize, cols: usize, op: Op) -> Var {
        debug_assert_eq!(value.len(), rows * cols);
        self.nodes.push(Node { value, rows, cols, op });
        Var(self.nodes.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Row-major `rows x cols` input.
    pub fn leaf(&mut self, value: Vec<f64>, rows: usize, cols: usize) -> Var {
        assert_eq!(value.len(), rows * cols, "leaf shape");
        self.push(value, rows, cols, Op::Leaf)
    }

    pub fn vector(&mut self, value: Vec<f64>) -> Var {
        let n = value.len();
        self.leaf(value, n, 1)
    }

    pub fn scalar(&mut self, value: f64) -> Var {
        self.leaf(vec![value], 1, 1)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        (self.nodes[v.0].rows, self.nodes[v.0].cols)
    }

    pub fn scalar_value(&self, v: Var) -> f64 {
        self.nodes[v.0].value[0]
    }

    pub fn matvec(&mut self, w: Var, x: Var) -> Var {
        let (r, c) = self.shape(w);
        assert_eq!(self.value(x).len(), c, "matvec shape");
        let (wv, xv) = (self.value(w), self.value(x));
        let out = (0..r).map(|i| wv[i * c..(i + 1) * c].iter().zip(xv).map(|(a, b)| a * b).sum()).collect();
        self.push(out, r, 1, Op::MatVec(w, x))
    }

    pub fn matvec_t(&mut self, w: Var, x: Var) -> Var {
        let (r, c) = self.shape(w);
        assert_eq!(self.value(x).len(), r, "matvec_t shape");
        let (wv, xv) = (self.value(w), self.value(x));
        let out = (0..c).map(|j| (0..r).map(|i| wv[i * c + j] * xv[i]).sum()).collect();
        self.push(out, c, 1, Op::MatTVec(w, x))
    }

    fn zip_with(&mut self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64, op: Op) -> Var {
        let (r, c) = self.shape(a);
        assert_eq!(self.value(a).len(), self.value(b).len(), "elementwise shape");
        let out = self.value(a).iter().zip(self.value(b)).map(|(x, y)| f(*x, *y)).collect();
        self.push(out, r, c, op)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn div(&mut self, a: Var, b: Var) -> Var {
        self.zip_with(a, b, |x, y| x / y, Op::Div(a, b))
    }

    pub fn scalar_mul(&mut self, s: Var, v: Var) -> Var {
        assert_eq!(self.value(s).len(), 1, "scalar_mul expects a scalar");
        let k = self.scalar_value(s);
        let (r, c) = self.shape(v);
        let out = self.value(v).iter().map(|x| k * x).collect();
        self.push(out, r, c, Op::ScalarMul(s, v))
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        let (r, c) = self.shape(a);
        let out = self.value(a).iter().map(|x| k * x).collect();
        self.push(out, r, c, Op::Scale(a, k))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let (r, c) = self.shape(a);
        let out = self.value(a).iter().map(|x| x.tanh()).collect();
        self.push(out, r, c, Op::Tanh(a))
    }

    pub fn square(&mut self, a: Var) -> Var {
        let (r, c) = self.shape(a);
        let out = self.value(a).iter().map(|x| x * x).collect();
        self.push(out, r, c, Op::Square(a))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).iter().sum();
        self.push(vec![s], 1, 1, Op::Sum(a))
    }

    pub fn dot(&mut self, a: Var, b: Var) -> Var {
        assert_eq!(self.value(a).len(), self.value(b).len(), "dot shape");
        let s = self.value(a).iter().zip(self.value(b)).map(|(x, y)| x * y).sum();
        self.push(vec![s], 1, 1, Op::Dot(a, b))
    }

    pub fn index(&mut self, a: Var, i: usize) -> Var {
        let v = self.value(a)[i];
        self.push(vec![v], 1, 1, Op::Index(a, i))
    }

    /// Concatenates into one column vector.
    pub fn concat(&mut self, parts: &[Var]) -> Var {
        let out: Vec<f64> = parts.iter().flat_map(|p| self.value(*p).iter().copied()).collect();
        let n = out.len();
        self.push(out, n, 1, Op::Concat(parts.to_vec()))
    }

    /// `A = S u` with `S = rowsoftmax(u n^T / sqrt(d))`.
    pub fn attention(&mut self, u: Var, n: Var) -> Var {
        let (uv, nv) = (self.value(u), self.value(n));
        assert_eq!(uv.len(), nv.len(), "attention shape");
        let d = uv.len();
        let s = softmax_rows(uv, nv);
        let out = (0..d).map(|i| (0..d).map(|j| s[i * d + j] * uv[j]).sum()).collect();
        self.push(out, d, 1, Op::Attention(u, n))
    }

    pub fn floor_magnitude(&mut self, a: Var, eps: f64) -> Var {
        let (r, c) = self.shape(a);
        let out = self
            .value(a)
            .iter()
            .map(|&x| if x.abs() >= eps { x } else if x < 0.0 { -eps } else { eps })
            .collect();
        self.push(out, r, c, Op::FloorMagnitude(a, eps))
    }

    /// Gradients of the scalar `root`.
    pub fn backward(&self, root: Var) -> Gradients {
        assert_eq!(self.nodes[root.0].value.len(), 1, "backward needs a scalar root");
        let mut g: Vec<Vec<f64>> = self.nodes.iter().map(|n| vec![0.0; n.value.len()]).collect();
        g[root.0][0] = 1.0;
        for idx in (0..=root.0).rev() {
            let node = &self.nodes[idx];
            if g[idx].iter().all(|&x| x == 0.0) {
                continue;
            }
            let go = std::mem::take(&mut g[idx]);
            match &node.op {
                Op::Leaf => {}
                Op::MatVec(w, x) => {
                    let (r, c) = self.shape(*w);
                    let (wv, xv) = (self.value(*w), self.value(*x));
                    for i in 0..r {
                        for j in 0..c {
                            g[w.0][i * c + j] += go[i] * xv[j];
                            g[x.0][j] += go[i] * wv[i * c + j];
                        }
                    }
                }
                Op::MatTVec(w, x) => {
                    let (r, c) = self.shape(*w);
                    let (wv, xv) = (self.value(*w), self.value(*x));
                    for i in 0..r {
                        for j in 0..c {
                            g[w.0][i * c + j] += go[j] * xv[i];
                            g[x.0][i] += go[j] * wv[i * c + j];
                        }
                    }
                }
                Op::Add(a, b) => {
                    for (k, v) in go.iter().enumerate() {
                        g[a.0][k] += v;
                        g[b.0][k] += v;
                    }
                }
                Op::Sub(a, b) => {
                    for (k, v) in go.iter().enumerate() {
                        g[a.0][k] += v;
                        g[b.0][k] -= v;
                    }
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    for (k, v) in go.iter().enumerate() {
                        g[a.0][k] += v * bv[k];
                        g[b.0][k] += v * av[k];
                    }
                }
                Op::Div(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    for (k, v) in go.iter().enumerate() {
                        g[a.0][k] += v / bv[k];
                        g[b.0][k] -= v * av[k] / (bv[k] * bv[k]);
                    }
                }
                Op::ScalarMul(s, x) => {
                    let k = self.scalar_value(*s);
                    let xv = self.value(*x);
                    let mut gs = 0.0;
                    for (i, v) in go.iter().enumerate() {
                        g[x.0][i] += v * k;
                        gs += v * xv[i];
                    }
                    g[s.0][0] += gs;
                }
                Op::Scale(a, k) => {
                    for (i, v) in go.iter().enumerate() {
                        g[a.0][i] += v * k;
                    }
                }
                Op::Tanh(a) => {
                    for (i, v) in go.iter().enumerate() {
                        let t = node.value[i];
                        g[a.0][i] += v * (1.0 - t * t);
                    }
                }
                Op::Square(a) => {
                    let av = self.value(*a);
                    for (i, v) in go.iter().enumerate() {
                        g[a.0][i] += 2.0 * v * av[i];
                    }
                }
                Op::Sum(a) => {
                    for x in g[a.0].iter_mut() {
                        *x += go[0];
                    }
                }
                Op::Dot(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    for k in 0..av.len() {
                        g[a.0][k] += go[0] * bv[k];
                        g[b.0][k] += go[0] * av[k];
                    }
                }
                Op::Index(a, i) => g[a.0][*i] += go[0],
                Op::Concat(parts) => {
                    let mut off = 0;
                    for p in parts {
                        let len = self.nodes[p.0].value.len();
                        for k in 0..len {
                            g[p.0][k] += go[off + k];
                        }
                        off += len;
                    }
                }
                Op::Attention(u, n) => {
                    let (uv, nv) = (self.value(*u), self.value(*n));
                    let d = uv.len();
                    let scale = 1.0 / (d as f64).sqrt();
                    let s = softmax_rows(uv, nv);
                    let mut gu = vec![0.0; d];
                    let mut gn = vec![0.0; d];
                    for i in 0..d {
                        let row = &s[i * d..(i + 1) * d];
                        // direct path: A_i = Σ_j S_ij u_j
                        for j in 0..d {
                            gu[j] += go[i] * row[j];
                        }
                        // through the softmax: dL/dS_ij = go_i u_j
                        let inner: f64 = (0..d).map(|k| row[k] * go[i] * uv[k]).sum();
                        for j in 0..d {
                            let gz = row[j] * (go[i] * uv[j] - inner);
                            gu[i] += gz * nv[j] * scale;
                            gn[j] += gz * uv[i] * scale;
                        }
                    }
                    for k in 0..d {
                        g[u.0][k] += gu[k];
                        g[n.0][k] += gn[k];
                    }
                }
                Op::FloorMagnitude(a, eps) => {
                    let av = self.value(*a);
                    for (i, v) in go.iter().enumerate() {
                        if av[i].abs() >= *eps {
                            g[a.0][i] += v;
                        }
                    }
                }
            }
            g[idx] = go;
        }
        Gradients { grads: g }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numeric(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        (0..x.len())
            .map(|i| {
                let mut p = x.to_vec();
                let mut m = x.to_vec();
                p[i] += h;
                m[i] -= h;
                (f(&p) - f(&m)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn attention_gradient() {
        let u0 = vec![0.3, -0.7, 1.1, 0.2];
        let n0 = vec![-0.5, 0.4, 0.9, -1.2];
        let w0 = vec![0.7, -0.1, 0.5, 1.3];
        let eval = |u: &[f64], n: &[f64]| {
            let mut g = Graph::new();
            let (u, n, w) = (g.vector(u.to_vec()), g.vector(n.to_vec()), g.vector(w0.clone()));
            let a = g.attention(u, n);
            let r = g.dot(a, w);
            (g.scalar_value(r), g, u, n, r)
        };
        let (_, g, u, n, r) = eval(&u0, &n0);
        let grads = g.backward(r);
        let nu = numeric(|x| eval(x, &n0).0, &u0);
        let nn = numeric(|x| eval(&u0, x).0, &n0);
        for (a, b) in grads.get(u).iter().zip(&nu) {
            assert!((a - b).abs() < 1e-8);
        }
        for (a, b) in grads.get(n).iter().zip(&nn) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn attention_zero_keys_average() {
        let mut g = Graph::new();
        let u = g.vector(vec![1.0, 2.0, 6.0]);
        let n = g.vector(vec![0.0; 3]);
        let a = g.attention(u, n);
        assert!(g.value(a).iter().all(|v| (v - 3.0).abs() < 1e-15));
    }

    #[test]
    fn chain_of_ops() {
        // f(w, x) = sum(tanh(W x)^2) / (1 + x_0)
        let w0 = vec![0.1, 0.2, -0.3, 0.4, 0.5, -0.6];
        let x0 = vec![0.7, -0.8, 0.9];
        let f = |w: &[f64], x: &[f64]| {
            let mut g = Graph::new();
            let wv = g.leaf(w.to_vec(), 2, 3);
            let xv = g.vector(x.to_vec());
            let h = g.matvec(wv, xv);
            let t = g.tanh(h);
            let s = g.square(t);
            let num = g.sum(s);
            let x_0 = g.index(xv, 0);
            let one = g.scalar(1.0);
            let den = g.add(one, x_0);
            let den = g.floor_magnitude(den, 1e-6);
            let out = g.div(num, den);
            (g.scalar_value(out), g, wv, xv, out)
        };
        let (_, g, wv, xv, out) = f(&w0, &x0);
        let grads = g.backward(out);
        for (a, b) in grads.get(wv).iter().zip(numeric(|w| f(w, &x0).0, &w0)) {
            assert!((a - b).abs() < 1e-8);
        }
        for (a, b) in grads.get(xv).iter().zip(numeric(|x| f(&w0, x).0, &x0)) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
