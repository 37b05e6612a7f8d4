//! Channel and spatial attention gates and their serial composition.
//!
//! The channel gate squeezes each feature map to average- and max-pooled
//! descriptors, runs both through one shared two-layer MLP (no biases), sums
//! the branches and applies a sigmoid. The spatial gate convolves the
//! channel-wise mean/max maps with a single 7×7 filter. Both gates multiply
//! into the feature map, channel attention first:
//! out = Ms ⊙ (Mc ⊙ F).
//!
//! Max pooling routes its gradient to the argmax element, first index in
//! row-major order on ties, so results are reproducible across
//! implementations.

use crate::error::{Error, Result};
use crate::layers::{conv_standard_bwd, conv_standard_fwd, sigmoid_scalar, Padding};
use crate::tensor::Tensor;

/// Shared-MLP weights of the channel gate: w1 is hidden×C, w2 is C×hidden.
#[derive(Clone, Debug)]
pub struct ChannelAttnParams {
    pub w1: Tensor,
    pub w2: Tensor,
}

/// Hidden width of the channel-gate MLP for C channels and reduction ratio r.
pub fn channel_hidden_width(c: usize, reduction: usize) -> usize {
    (c / reduction.max(1)).max(1)
}

impl ChannelAttnParams {
    /// Zero-initialized params for C channels at the given reduction ratio.
    pub fn zeros(c: usize, reduction: usize) -> Self {
        let hidden = channel_hidden_width(c, reduction);
        ChannelAttnParams {
            w1: Tensor::zeros(&[hidden, c]),
            w2: Tensor::zeros(&[c, hidden]),
        }
    }

    fn validate(&self, c: usize) -> Result<usize> {
        if self.w1.rank() != 2 || self.w2.rank() != 2 {
            return Err(Error::shape("channel_attention", "w1/w2 must be matrices".to_string()));
        }
        let (hidden, w1c) = (self.w1.shape()[0], self.w1.shape()[1]);
        let (w2c, w2h) = (self.w2.shape()[0], self.w2.shape()[1]);
        if w1c != c || w2c != c || w2h != hidden {
            return Err(Error::shape(
                "channel_attention",
                format!(
                    "w1 {:?} / w2 {:?} inconsistent with {c} channels",
                    self.w1.shape(),
                    self.w2.shape()
                ),
            ));
        }
        Ok(hidden)
    }
}

/// 7×7 filter over the 2-channel [avg; max] map, plus a scalar bias.
#[derive(Clone, Debug)]
pub struct SpatialAttnParams {
    pub kernel: Tensor, // 1×2×7×7
    pub bias: f64,
}

impl SpatialAttnParams {
    pub fn zeros() -> Self {
        SpatialAttnParams { kernel: Tensor::zeros(&[1, 2, 7, 7]), bias: 0.0 }
    }

    fn validate(&self) -> Result<()> {
        if self.kernel.shape() != [1, 2, 7, 7] {
            return Err(Error::shape(
                "spatial_attention",
                format!("kernel {:?}, need [1, 2, 7, 7]", self.kernel.shape()),
            ));
        }
        Ok(())
    }
}

struct ChannelCache {
    f: Tensor,
    f_avg: Tensor,      // N×C
    f_max: Tensor,      // N×C
    max_idx: Vec<usize>, // spatial argmax per (n, c)
    h_avg_pre: Tensor,  // N×hidden
    h_avg: Tensor,
    h_max_pre: Tensor,
    h_max: Tensor,
}

/// Forward result of the channel gate. `cache` is None when the gate was
/// forced to identity by a test hook.
pub struct ChannelAttnFwd {
    /// Per-channel gate values in (0, 1), N×C.
    pub mc: Tensor,
    /// Refined feature map Mc ⊙ F.
    pub fc: Tensor,
    cache: Option<ChannelCache>,
}

/// Gradients of the channel gate.
pub struct ChannelAttnGrads {
    pub f: Tensor,
    pub w1: Tensor,
    pub w2: Tensor,
}

fn mat_vec(m: &Tensor, v: &[f64]) -> Vec<f64> {
    let (rows, cols) = (m.shape()[0], m.shape()[1]);
    debug_assert_eq!(cols, v.len());
    let mut out = vec![0.0; rows];
    for r in 0..rows {
        let base = r * cols;
        out[r] = (0..cols).map(|c| m.data()[base + c] * v[c]).sum();
    }
    out
}

fn mat_t_vec(m: &Tensor, v: &[f64]) -> Vec<f64> {
    let (rows, cols) = (m.shape()[0], m.shape()[1]);
    debug_assert_eq!(rows, v.len());
    let mut out = vec![0.0; cols];
    for r in 0..rows {
        let base = r * cols;
        for c in 0..cols {
            out[c] += m.data()[base + c] * v[r];
        }
    }
    out
}

/// Channel attention: Mc = σ(W2·δ(W1·F_avg) + W2·δ(W1·F_max)), then
/// Fc = Mc ⊙ F broadcast over spatial positions.
pub fn channel_attention_fwd(f: &Tensor, params: &ChannelAttnParams) -> Result<ChannelAttnFwd> {
    let s = f.shape4()?;
    let (n, c, h, w) = (s.n, s.c, s.h, s.w);
    let hidden = params.validate(c)?;
    let hw = h * w;

    let mut f_avg = Tensor::zeros(&[n, c]);
    let mut f_max = Tensor::zeros(&[n, c]);
    let mut max_idx = vec![0usize; n * c];
    for ni in 0..n {
        for ci in 0..c {
            let base = (ni * c + ci) * hw;
            let plane = &f.data()[base..base + hw];
            f_avg.data_mut()[ni * c + ci] = plane.iter().sum::<f64>() / hw as f64;
            let mut best = plane[0];
            let mut best_i = 0usize;
            for (i, &v) in plane.iter().enumerate().skip(1) {
                if v > best {
                    best = v;
                    best_i = i;
                }
            }
            f_max.data_mut()[ni * c + ci] = best;
            max_idx[ni * c + ci] = best_i;
        }
    }

    let mut h_avg_pre = Tensor::zeros(&[n, hidden]);
    let mut h_max_pre = Tensor::zeros(&[n, hidden]);
    let mut mc = Tensor::zeros(&[n, c]);
    for ni in 0..n {
        let avg_row = &f_avg.data()[ni * c..(ni + 1) * c];
        let max_row = &f_max.data()[ni * c..(ni + 1) * c];
        let pa = mat_vec(&params.w1, avg_row);
        let pm = mat_vec(&params.w1, max_row);
        h_avg_pre.data_mut()[ni * hidden..(ni + 1) * hidden].copy_from_slice(&pa);
        h_max_pre.data_mut()[ni * hidden..(ni + 1) * hidden].copy_from_slice(&pm);
        let ha: Vec<f64> = pa.iter().map(|&v| v.max(0.0)).collect();
        let hm: Vec<f64> = pm.iter().map(|&v| v.max(0.0)).collect();
        let oa = mat_vec(&params.w2, &ha);
        let om = mat_vec(&params.w2, &hm);
        for ci in 0..c {
            mc.data_mut()[ni * c + ci] = sigmoid_scalar(oa[ci] + om[ci]);
        }
    }
    let h_avg = crate::layers::relu_fwd(&h_avg_pre);
    let h_max = crate::layers::relu_fwd(&h_max_pre);

    let mut fc = f.clone();
    for ni in 0..n {
        for ci in 0..c {
            let g = mc.data()[ni * c + ci];
            let base = (ni * c + ci) * hw;
            for v in &mut fc.data_mut()[base..base + hw] {
                *v *= g;
            }
        }
    }

    Ok(ChannelAttnFwd {
        mc,
        fc,
        cache: Some(ChannelCache {
            f: f.clone(),
            f_avg,
            f_max,
            max_idx,
            h_avg_pre,
            h_avg,
            h_max_pre,
            h_max,
        }),
    })
}

/// Test hook: gate pinned to 1, pass-through is bit-exact.
pub fn channel_attention_identity(f: &Tensor) -> Result<ChannelAttnFwd> {
    let s = f.shape4()?;
    Ok(ChannelAttnFwd {
        mc: Tensor::fill(&[s.n, s.c], 1.0),
        fc: f.clone(),
        cache: None,
    })
}

/// Backward pass of the channel gate; identity-forced forwards pass the
/// gradient straight through with zero parameter gradients.
pub fn channel_attention_bwd(
    fwd: &ChannelAttnFwd,
    params: &ChannelAttnParams,
    grad_fc: &Tensor,
) -> Result<ChannelAttnGrads> {
    if grad_fc.shape() != fwd.fc.shape() {
        return Err(Error::shape(
            "channel_attention_bwd",
            format!("upstream {:?} vs output {:?}", grad_fc.shape(), fwd.fc.shape()),
        ));
    }
    let cache = match &fwd.cache {
        Some(c) => c,
        None => {
            return Ok(ChannelAttnGrads {
                f: grad_fc.clone(),
                w1: Tensor::zeros(params.w1.shape()),
                w2: Tensor::zeros(params.w2.shape()),
            })
        }
    };
    let s = cache.f.shape4()?;
    let (n, c, h, w) = (s.n, s.c, s.h, s.w);
    let hidden = params.w1.shape()[0];
    let hw = h * w;

    // Gate path: dMc and the direct product term.
    let mut d_mc = vec![0.0; n * c];
    let mut grad_f = Tensor::zeros(cache.f.shape());
    for ni in 0..n {
        for ci in 0..c {
            let base = (ni * c + ci) * hw;
            let gate = fwd.mc.data()[ni * c + ci];
            let mut acc = 0.0;
            for i in 0..hw {
                let g = grad_fc.data()[base + i];
                acc += g * cache.f.data()[base + i];
                grad_f.data_mut()[base + i] = g * gate;
            }
            d_mc[ni * c + ci] = acc;
        }
    }

    let mut grad_w1 = Tensor::zeros(params.w1.shape());
    let mut grad_w2 = Tensor::zeros(params.w2.shape());
    for ni in 0..n {
        // through the sigmoid
        let mut d_pre = vec![0.0; c];
        for ci in 0..c {
            let m = fwd.mc.data()[ni * c + ci];
            d_pre[ci] = d_mc[ni * c + ci] * m * (1.0 - m);
        }
        let h_avg = &cache.h_avg.data()[ni * hidden..(ni + 1) * hidden];
        let h_max = &cache.h_max.data()[ni * hidden..(ni + 1) * hidden];
        // w2 sees both branches
        for ci in 0..c {
            for hi in 0..hidden {
                grad_w2.data_mut()[ci * hidden + hi] += d_pre[ci] * (h_avg[hi] + h_max[hi]);
            }
        }
        let mut d_h_avg = mat_t_vec(&params.w2, &d_pre);
        let mut d_h_max = d_h_avg.clone();
        for hi in 0..hidden {
            if cache.h_avg_pre.data()[ni * hidden + hi] <= 0.0 {
                d_h_avg[hi] = 0.0;
            }
            if cache.h_max_pre.data()[ni * hidden + hi] <= 0.0 {
                d_h_max[hi] = 0.0;
            }
        }
        let f_avg = &cache.f_avg.data()[ni * c..(ni + 1) * c];
        let f_max = &cache.f_max.data()[ni * c..(ni + 1) * c];
        for hi in 0..hidden {
            for ci in 0..c {
                grad_w1.data_mut()[hi * c + ci] += d_h_avg[hi] * f_avg[ci] + d_h_max[hi] * f_max[ci];
            }
        }
        let d_f_avg = mat_t_vec(&params.w1, &d_h_avg);
        let d_f_max = mat_t_vec(&params.w1, &d_h_max);
        for ci in 0..c {
            let base = (ni * c + ci) * hw;
            let share = d_f_avg[ci] / hw as f64;
            for i in 0..hw {
                grad_f.data_mut()[base + i] += share;
            }
            grad_f.data_mut()[base + cache.max_idx[ni * c + ci]] += d_f_max[ci];
        }
    }

    Ok(ChannelAttnGrads { f: grad_f, w1: grad_w1, w2: grad_w2 })
}

struct SpatialCache {
    fc: Tensor,
    concat: Tensor,      // N×2×H×W: [channel mean; channel max]
    max_ch: Vec<usize>,  // argmax channel per (n, y, x)
}

/// Forward result of the spatial gate.
pub struct SpatialAttnFwd {
    /// Per-position gate values in (0, 1), N×H×W.
    pub ms: Tensor,
    /// Refined feature map Ms ⊙ Fc.
    pub out: Tensor,
    cache: Option<SpatialCache>,
}

/// Gradients of the spatial gate.
pub struct SpatialAttnGrads {
    pub fc: Tensor,
    pub kernel: Tensor,
    pub bias: f64,
}

/// Spatial attention: Ms = σ(f7×7([mean_c; max_c])), then out = Ms ⊙ Fc
/// broadcast over channels.
pub fn spatial_attention_fwd(fc: &Tensor, params: &SpatialAttnParams) -> Result<SpatialAttnFwd> {
    params.validate()?;
    let s = fc.shape4()?;
    let (n, c, h, w) = (s.n, s.c, s.h, s.w);
    let hw = h * w;

    let mut concat = Tensor::zeros(&[n, 2, h, w]);
    let mut max_ch = vec![0usize; n * hw];
    for ni in 0..n {
        for i in 0..hw {
            let mut sum = 0.0;
            let mut best = f64::MIN;
            let mut best_c = 0usize;
            for ci in 0..c {
                let v = fc.data()[(ni * c + ci) * hw + i];
                sum += v;
                if v > best {
                    best = v;
                    best_c = ci;
                }
            }
            concat.data_mut()[(ni * 2) * hw + i] = sum / c as f64;
            concat.data_mut()[(ni * 2 + 1) * hw + i] = best;
            max_ch[ni * hw + i] = best_c;
        }
    }

    let bias = Tensor::new(&[1], vec![params.bias])?;
    let pre = conv_standard_fwd(&concat, &params.kernel, Some(&bias), 1, Padding::Same)?;
    let mut ms = Tensor::zeros(&[n, h, w]);
    for (o, &p) in ms.data_mut().iter_mut().zip(pre.data()) {
        *o = sigmoid_scalar(p);
    }

    let mut out = fc.clone();
    for ni in 0..n {
        for ci in 0..c {
            let base = (ni * c + ci) * hw;
            for i in 0..hw {
                out.data_mut()[base + i] *= ms.data()[ni * hw + i];
            }
        }
    }

    Ok(SpatialAttnFwd {
        ms,
        out,
        cache: Some(SpatialCache { fc: fc.clone(), concat, max_ch }),
    })
}

/// Test hook: gate pinned to 1, pass-through is bit-exact.
pub fn spatial_attention_identity(fc: &Tensor) -> Result<SpatialAttnFwd> {
    let s = fc.shape4()?;
    Ok(SpatialAttnFwd {
        ms: Tensor::fill(&[s.n, s.h, s.w], 1.0),
        out: fc.clone(),
        cache: None,
    })
}

/// Backward pass of the spatial gate.
pub fn spatial_attention_bwd(
    fwd: &SpatialAttnFwd,
    params: &SpatialAttnParams,
    grad_out: &Tensor,
) -> Result<SpatialAttnGrads> {
    if grad_out.shape() != fwd.out.shape() {
        return Err(Error::shape(
            "spatial_attention_bwd",
            format!("upstream {:?} vs output {:?}", grad_out.shape(), fwd.out.shape()),
        ));
    }
    let cache = match &fwd.cache {
        Some(c) => c,
        None => {
            return Ok(SpatialAttnGrads {
                fc: grad_out.clone(),
                kernel: Tensor::zeros(params.kernel.shape()),
                bias: 0.0,
            })
        }
    };
    let s = cache.fc.shape4()?;
    let (n, c, h, w) = (s.n, s.c, s.h, s.w);
    let hw = h * w;

    let mut d_ms = vec![0.0; n * hw];
    let mut grad_fc = Tensor::zeros(cache.fc.shape());
    for ni in 0..n {
        for ci in 0..c {
            let base = (ni * c + ci) * hw;
            for i in 0..hw {
                let g = grad_out.data()[base + i];
                d_ms[ni * hw + i] += g * cache.fc.data()[base + i];
                grad_fc.data_mut()[base + i] = g * fwd.ms.data()[ni * hw + i];
            }
        }
    }

    let mut d_pre = Tensor::zeros(&[n, 1, h, w]);
    for i in 0..n * hw {
        let m = fwd.ms.data()[i];
        d_pre.data_mut()[i] = d_ms[i] * m * (1.0 - m);
    }

    let (d_concat, grad_kernel, grad_bias) =
        conv_standard_bwd(&cache.concat, &params.kernel, 1, Padding::Same, &d_pre)?;

    for ni in 0..n {
        for i in 0..hw {
            let d_avg = d_concat.data()[(ni * 2) * hw + i] / c as f64;
            let d_max = d_concat.data()[(ni * 2 + 1) * hw + i];
            for ci in 0..c {
                grad_fc.data_mut()[(ni * c + ci) * hw + i] += d_avg;
            }
            let mc = cache.max_ch[ni * hw + i];
            grad_fc.data_mut()[(ni * c + mc) * hw + i] += d_max;
        }
    }

    Ok(SpatialAttnGrads { fc: grad_fc, kernel: grad_kernel, bias: grad_bias.data()[0] })
}

/// Which gates a composed attention block should force to identity.
/// Used by tests and the no-attention equivalence checks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CbamHooks {
    pub identity_channel: bool,
    pub identity_spatial: bool,
}

/// Forward state of the composed block.
pub struct CbamFwd {
    pub channel: ChannelAttnFwd,
    pub spatial: SpatialAttnFwd,
}

impl CbamFwd {
    pub fn output(&self) -> &Tensor {
        &self.spatial.out
    }
}

/// Gradients of the composed block.
pub struct CbamGrads {
    pub f: Tensor,
    pub w1: Tensor,
    pub w2: Tensor,
    pub kernel: Tensor,
    pub bias: f64,
}

/// Composed refinement out = Ms ⊙ (Mc ⊙ F): channel gate first, spatial second.
pub fn cbam_fwd(
    f: &Tensor,
    cp: &ChannelAttnParams,
    sp: &SpatialAttnParams,
    hooks: CbamHooks,
) -> Result<CbamFwd> {
    let channel = if hooks.identity_channel {
        channel_attention_identity(f)?
    } else {
        channel_attention_fwd(f, cp)?
    };
    let spatial = if hooks.identity_spatial {
        spatial_attention_identity(&channel.fc)?
    } else {
        spatial_attention_fwd(&channel.fc, sp)?
    };
    Ok(CbamFwd { channel, spatial })
}

pub fn cbam_bwd(
    fwd: &CbamFwd,
    cp: &ChannelAttnParams,
    sp: &SpatialAttnParams,
    grad_out: &Tensor,
) -> Result<CbamGrads> {
    let sg = spatial_attention_bwd(&fwd.spatial, sp, grad_out)?;
    let cg = channel_attention_bwd(&fwd.channel, cp, &sg.fc)?;
    Ok(CbamGrads { f: cg.f, w1: cg.w1, w2: cg.w2, kernel: sg.kernel, bias: sg.bias })
}

/// One-shot composed attention without caches.
pub fn cbam(f: &Tensor, cp: &ChannelAttnParams, sp: &SpatialAttnParams) -> Result<Tensor> {
    Ok(cbam_fwd(f, cp, sp, CbamHooks::default())?.spatial.out)
}
