use std::collections::VecDeque;

use crate::error::{Error, Result};

/// One fixed-length FIFO of recent losses per category, initially all `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryBuffers {
    h: usize,
    queues: Vec<VecDeque<f64>>,
}

impl CategoryBuffers {
    pub fn new(k: usize, h: usize) -> Result<Self> {
        if h == 0 || k == 0 {
            return Err(Error::Config(format!("buffers need k >= 1 and h >= 1, got k={k} h={h}")));
        }
        Ok(Self {
            h,
            queues: vec![VecDeque::from(vec![f64::INFINITY; h]); k],
        })
    }

    pub fn len(&self) -> usize {
        self.h
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn num_classes(&self) -> usize {
        self.queues.len()
    }

    /// Append `loss` to queue `class` and evict its oldest entry.
    pub fn push(&mut self, class: usize, loss: f64) {
        let q = &mut self.queues[class];
        q.pop_front();
        q.push_back(loss);
    }

    /// Entries of queue `class`, oldest first.
    pub fn queue(&self, class: usize) -> impl Iterator<Item = f64> + '_ {
        self.queues[class].iter().copied()
    }
}

/// `max(1, floor(R·h))`, capped at `h`. A tolerance of 1e-9 absorbs float
/// error in products like `0.29 · 100`.
pub fn selection_rank(keep_ratio: f64, h: usize) -> usize {
    let r = (keep_ratio * h as f64 + 1e-9).floor();
    (r.max(1.0) as usize).min(h)
}

/// The `r`-th largest loss in queue `class`, with `r = selection_rank(R, h)`.
/// `+∞` entries count toward the rank, so a fresh queue yields `+∞`.
pub fn selection_threshold(buffers: &CategoryBuffers, class: usize, keep_ratio: f64) -> f64 {
    let mut values: Vec<f64> = buffers.queue(class).collect();
    let r = selection_rank(keep_ratio, buffers.len());
    values.sort_by(|a, b| b.total_cmp(a));
    values[r - 1]
}

/// Keep a sample whose loss does not exceed its category's threshold.
pub fn accept_sample(loss: f64, buffers: &CategoryBuffers, class: usize, keep_ratio: f64) -> bool {
    loss <= selection_threshold(buffers, class, keep_ratio)
}
