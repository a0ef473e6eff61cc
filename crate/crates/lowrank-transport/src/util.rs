//! Small numeric helpers.

/// Neumaier compensated accumulator.
///
/// The asymptotic-limit checks compare quantities near 1e-5 on grids with
/// ~1e5 summands; naive accumulation noise would be visible at that scale.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Accumulator::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive_on_cancellation() {
        // 1 + 1e-16 repeated: naive sum loses the small terms entirely.
        let mut vals = vec![1.0];
        vals.extend(std::iter::repeat(1e-16).take(1_000_000));
        let exact = 1.0 + 1e-10;
        let comp = compensated_sum(vals.iter().copied());
        assert!((comp - exact).abs() < 1e-22, "comp={comp:e}");
    }
}
