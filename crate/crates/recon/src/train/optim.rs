use gauss4d_model::ModelParams;

/// Linear warmup followed by cosine decay to `min_lr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub lr: f64,
    pub warmup: usize,
    pub total: usize,
    pub min_lr: f64,
}

impl Schedule {
    pub fn at(&self, step: usize) -> f64 {
        if step < self.warmup {
            return self.lr * (step + 1) as f64 / self.warmup as f64;
        }
        let span = self.total.saturating_sub(self.warmup).max(1);
        let p = ((step - self.warmup) as f64 / span as f64).min(1.0);
        self.min_lr + 0.5 * (self.lr - self.min_lr) * (1.0 + (std::f64::consts::PI * p).cos())
    }
}

#[derive(Debug, Clone)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    m: ModelParams,
    v: ModelParams,
    t: u64,
}

impl Adam {
    pub fn new(params: &ModelParams, beta1: f64, beta2: f64, eps: f64, weight_decay: f64) -> Self {
        Adam {
            beta1,
            beta2,
            eps,
            weight_decay,
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One update. Coordinates whose gradient and moments are all zero are
    /// left bit-identical (and are untouched by decay when it is off).
    pub fn step(&mut self, params: &mut ModelParams, grads: &ModelParams, lr: f64) {
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.t as i32);
        let c2 = 1.0 - b2.powi(self.t as i32);
        for (((p, g), m), v) in params
            .tensors
            .iter_mut()
            .zip(&grads.tensors)
            .zip(self.m.tensors.iter_mut())
            .zip(self.v.tensors.iter_mut())
        {
            for (((x, &gi), mi), vi) in p.data.iter_mut().zip(&g.data).zip(m.data.iter_mut()).zip(v.data.iter_mut()) {
                let gi = gi as f64;
                if gi == 0.0 && *mi == 0.0 && *vi == 0.0 {
                    if self.weight_decay != 0.0 {
                        *x -= (lr * self.weight_decay * *x as f64) as f32;
                    }
                    continue;
                }
                let m1 = b1 * *mi as f64 + (1.0 - b1) * gi;
                let v1 = b2 * *vi as f64 + (1.0 - b2) * gi * gi;
                *mi = m1 as f32;
                *vi = v1 as f32;
                let upd = lr * (m1 / c1) / ((v1 / c2).sqrt() + self.eps) + lr * self.weight_decay * *x as f64;
                *x -= upd as f32;
            }
        }
    }
}
