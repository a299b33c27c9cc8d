//! Peephole LSTM cell: forward step, cached step and its reverse pass.
//!
//! ```text
//! i = σ(W_i x + U_i h' + V_i c' + b_i)
//! f = σ(W_f x + U_f h' + V_f c' + b_f)
//! c = f ⊙ c' + i ⊙ tanh(W_c x + U_c h' + b_c)
//! o = σ(W_o x + U_o h' + V_o c + b_o)
//! h = o ⊙ tanh(c)
//! ```

use super::config::Peephole;
use crate::error::{Error, Result};
use crate::numcore::{sigmoid_raw, Grads, Matrix, ParamId, ParamStore, Real, Vector};

const GATES: [&str; 4] = ["i", "f", "c", "o"];
const PEEPS: [&str; 3] = ["i", "f", "o"];
const I: usize = 0;
const F: usize = 1;
const C: usize = 2;
const O: usize = 3;

/// Where one LSTM's tensors live inside a [`ParamStore`].
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayout {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub peephole: Peephole,
    w: [ParamId; 4],
    u: [ParamId; 4],
    v: [ParamId; 3],
    b: [ParamId; 4],
}

impl LstmLayout {
    /// Adds zero-initialised LSTM tensors named `{prefix}.W_i`, `{prefix}.U_f`, ...
    pub fn register<T: Real>(
        store: &mut ParamStore<T>,
        prefix: &str,
        input_dim: usize,
        hidden_dim: usize,
        peephole: Peephole,
    ) -> Result<Self> {
        let mut add = |name: String, r, c| store.add(name, Matrix::zeros(r, c));
        let w = try_array(|k| add(format!("{prefix}.W_{}", GATES[k]), hidden_dim, input_dim))?;
        let u = try_array(|k| add(format!("{prefix}.U_{}", GATES[k]), hidden_dim, hidden_dim))?;
        let vcols = match peephole {
            Peephole::Diagonal => 1,
            Peephole::Dense => hidden_dim,
        };
        let v = try_array(|k| add(format!("{prefix}.V_{}", PEEPS[k]), hidden_dim, vcols))?;
        let b = try_array(|k| add(format!("{prefix}.b_{}", GATES[k]), hidden_dim, 1))?;
        Ok(Self {
            input_dim,
            hidden_dim,
            peephole,
            w,
            u,
            v,
            b,
        })
    }

    /// Looks up an existing layout by name and checks every shape.
    pub fn attach<T: Real>(
        store: &ParamStore<T>,
        prefix: &str,
        input_dim: usize,
        hidden_dim: usize,
        peephole: Peephole,
    ) -> Result<Self> {
        let get = |name: String, r: usize, c: usize| -> Result<ParamId> {
            let id = store.id(&name)?;
            let got = store.value(id).shape();
            if got != (r, c) {
                return Err(Error::Shape {
                    op: "LstmLayout::attach",
                    expected: format!("{name}: {r}x{c}"),
                    got: format!("{}x{}", got.0, got.1),
                });
            }
            Ok(id)
        };
        let vcols = match peephole {
            Peephole::Diagonal => 1,
            Peephole::Dense => hidden_dim,
        };
        Ok(Self {
            input_dim,
            hidden_dim,
            peephole,
            w: try_array(|k| get(format!("{prefix}.W_{}", GATES[k]), hidden_dim, input_dim))?,
            u: try_array(|k| get(format!("{prefix}.U_{}", GATES[k]), hidden_dim, hidden_dim))?,
            v: try_array(|k| get(format!("{prefix}.V_{}", PEEPS[k]), hidden_dim, vcols))?,
            b: try_array(|k| get(format!("{prefix}.b_{}", GATES[k]), hidden_dim, 1))?,
        })
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> + '_ {
        self.w
            .iter()
            .chain(&self.u)
            .chain(&self.v)
            .chain(&self.b)
            .copied()
    }
}

fn try_array<const N: usize>(mut f: impl FnMut(usize) -> Result<ParamId>) -> Result<[ParamId; N]> {
    let mut out = [ParamId(0); N];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = f(k)?;
    }
    Ok(out)
}

/// Activations kept from a forward step for the reverse pass.
#[derive(Debug, Clone)]
pub struct StepCache<T> {
    pub x: Vec<T>,
    pub h_prev: Vec<T>,
    pub c_prev: Vec<T>,
    pub i: Vec<T>,
    pub f: Vec<T>,
    pub g: Vec<T>,
    pub o: Vec<T>,
    pub c: Vec<T>,
    pub tanh_c: Vec<T>,
    pub h: Vec<T>,
}

fn peep_acc<T: Real>(v: &Matrix<T>, kind: Peephole, c: &[T], out: &mut [T]) {
    match kind {
        Peephole::Diagonal => {
            for ((o, &w), &ck) in out.iter_mut().zip(v.as_slice()).zip(c) {
                *o += w * ck;
            }
        }
        Peephole::Dense => v.matvec_acc(c, out),
    }
}

fn peep_back<T: Real>(
    v: &Matrix<T>,
    kind: Peephole,
    da: &[T],
    c: &[T],
    dv: &mut Matrix<T>,
    dc: &mut [T],
) {
    match kind {
        Peephole::Diagonal => {
            let dvs = dv.as_mut_slice();
            for k in 0..da.len() {
                dc[k] += v.as_slice()[k] * da[k];
                dvs[k] += da[k] * c[k];
            }
        }
        Peephole::Dense => {
            v.t_matvec_acc(da, dc);
            dv.outer_acc(da, c);
        }
    }
}

/// Forward step that keeps its activations.
pub(crate) fn step_cached<T: Real>(
    store: &ParamStore<T>,
    l: &LstmLayout,
    x: &[T],
    h_prev: &[T],
    c_prev: &[T],
) -> StepCache<T> {
    let n = l.hidden_dim;
    let pre = |gate: usize| {
        let mut a = store.value(l.b[gate]).as_slice().to_vec();
        store.value(l.w[gate]).matvec_acc(x, &mut a);
        store.value(l.u[gate]).matvec_acc(h_prev, &mut a);
        a
    };
    let mut ai = pre(I);
    peep_acc(store.value(l.v[0]), l.peephole, c_prev, &mut ai);
    let mut af = pre(F);
    peep_acc(store.value(l.v[1]), l.peephole, c_prev, &mut af);
    let ag = pre(C);
    let i: Vec<T> = ai.iter().map(|&a| sigmoid_raw(a)).collect();
    let f: Vec<T> = af.iter().map(|&a| sigmoid_raw(a)).collect();
    let g: Vec<T> = ag.iter().map(|a| a.tanh()).collect();
    let c: Vec<T> = (0..n).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();
    let mut ao = pre(O);
    peep_acc(store.value(l.v[2]), l.peephole, &c, &mut ao);
    let o: Vec<T> = ao.iter().map(|&a| sigmoid_raw(a)).collect();
    let tanh_c: Vec<T> = c.iter().map(|a| a.tanh()).collect();
    let h = (0..n).map(|k| o[k] * tanh_c[k]).collect();
    StepCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        c_prev: c_prev.to_vec(),
        i,
        f,
        g,
        o,
        c,
        tanh_c,
        h,
    }
}

/// Reverse pass of one step. `dh` and `dc` are the loss gradients flowing into
/// this step's outputs; returns the gradients for `h_prev` and `c_prev`, and
/// adds `∂L/∂x` into `dx` when requested.
pub(crate) fn step_backward<T: Real>(
    store: &ParamStore<T>,
    l: &LstmLayout,
    cache: &StepCache<T>,
    dh: &[T],
    dc: &[T],
    grads: &mut Grads<T>,
    dx: Option<&mut [T]>,
) -> (Vec<T>, Vec<T>) {
    let n = l.hidden_dim;
    let one = T::one();
    let mut da_o = vec![T::zero(); n];
    let mut dct = dc.to_vec();
    for k in 0..n {
        let o = cache.o[k];
        da_o[k] = dh[k] * cache.tanh_c[k] * o * (one - o);
        let tc = cache.tanh_c[k];
        dct[k] += dh[k] * o * (one - tc * tc);
    }
    // output-gate peephole reads the new cell state
    peep_back(
        store.value(l.v[2]),
        l.peephole,
        &da_o,
        &cache.c,
        grads.get_mut(l.v[2]),
        &mut dct,
    );

    let mut da_i = vec![T::zero(); n];
    let mut da_f = vec![T::zero(); n];
    let mut da_g = vec![T::zero(); n];
    let mut dc_prev = vec![T::zero(); n];
    for k in 0..n {
        let (i, f, g) = (cache.i[k], cache.f[k], cache.g[k]);
        da_i[k] = dct[k] * g * i * (one - i);
        da_f[k] = dct[k] * cache.c_prev[k] * f * (one - f);
        da_g[k] = dct[k] * i * (one - g * g);
        dc_prev[k] = dct[k] * f;
    }
    peep_back(
        store.value(l.v[0]),
        l.peephole,
        &da_i,
        &cache.c_prev,
        grads.get_mut(l.v[0]),
        &mut dc_prev,
    );
    peep_back(
        store.value(l.v[1]),
        l.peephole,
        &da_f,
        &cache.c_prev,
        grads.get_mut(l.v[1]),
        &mut dc_prev,
    );

    let mut dh_prev = vec![T::zero(); n];
    let mut dx = dx;
    for (gate, da) in [(I, &da_i), (F, &da_f), (C, &da_g), (O, &da_o)] {
        grads.get_mut(l.w[gate]).outer_acc(da, &cache.x);
        grads.get_mut(l.u[gate]).outer_acc(da, &cache.h_prev);
        for (b, &d) in grads
            .get_mut(l.b[gate])
            .as_mut_slice()
            .iter_mut()
            .zip(da.iter())
        {
            *b += d;
        }
        store.value(l.u[gate]).t_matvec_acc(da, &mut dh_prev);
        if let Some(dx) = dx.as_deref_mut() {
            store.value(l.w[gate]).t_matvec_acc(da, dx);
        }
    }
    (dh_prev, dc_prev)
}

/// One validated LSTM step: returns the new hidden and cell states.
pub fn lstm_step<T: Real>(
    store: &ParamStore<T>,
    layout: &LstmLayout,
    x: &Vector<T>,
    h_prev: &Vector<T>,
    c_prev: &Vector<T>,
) -> Result<(Vector<T>, Vector<T>)> {
    let check = |what: &'static str, got: usize, want: usize| {
        if got == want {
            Ok(())
        } else {
            Err(Error::Shape {
                op: what,
                expected: want.to_string(),
                got: got.to_string(),
            })
        }
    };
    check("lstm_step input", x.len(), layout.input_dim)?;
    check("lstm_step h_prev", h_prev.len(), layout.hidden_dim)?;
    check("lstm_step c_prev", c_prev.len(), layout.hidden_dim)?;
    let cache = step_cached(
        store,
        layout,
        x.as_slice(),
        h_prev.as_slice(),
        c_prev.as_slice(),
    );
    let h = Vector::from_vec(cache.h)?;
    let c = Vector::from_vec(cache.c)?;
    Ok((h, c))
}
