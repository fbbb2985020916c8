use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::mfa::DEFAULT_WINDOW_WIDTH_MS;

pub const DEFAULT_SKEW_ALLOWANCE_MS: u64 = 5_000;

/// Where an event's mass lands in the ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Routing {
    OnTime(u64),
    /// The event's own window was already finalized; its mass goes to the
    /// earliest open window instead.
    Late {
        window: u64,
        applied_to: u64,
    },
}

impl Routing {
    pub fn target_window(self) -> u64 {
        match self {
            Routing::OnTime(w) => w,
            Routing::Late { applied_to, .. } => applied_to,
        }
    }

    pub fn is_late(self) -> bool {
        matches!(self, Routing::Late { .. })
    }
}

/// Tumbling sampling windows driven by a watermark of
/// `max(ts) - skew_allowance`.
///
/// Window `w` covers `[w * width, (w + 1) * width)` and is finalized once the
/// watermark reaches `(w + 1) * width`. Finalized windows are never reopened.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowAssigner {
    window_width_ms: u64,
    skew_allowance_ms: u64,
    watermark_ms: u64,
}

impl Default for WindowAssigner {
    fn default() -> Self {
        WindowAssigner::new(DEFAULT_WINDOW_WIDTH_MS, DEFAULT_SKEW_ALLOWANCE_MS)
    }
}

impl WindowAssigner {
    /// # Panics
    /// If `window_width_ms` is zero.
    pub fn new(window_width_ms: u64, skew_allowance_ms: u64) -> Self {
        assert!(window_width_ms > 0, "window width must be positive");
        WindowAssigner {
            window_width_ms,
            skew_allowance_ms,
            watermark_ms: 0,
        }
    }

    pub fn window_width_ms(&self) -> u64 {
        self.window_width_ms
    }

    pub fn skew_allowance_ms(&self) -> u64 {
        self.skew_allowance_ms
    }

    pub fn watermark_ms(&self) -> u64 {
        self.watermark_ms
    }

    pub fn assign_window(&self, ts_ms: u64) -> u64 {
        ts_ms / self.window_width_ms
    }

    /// Windows `0..finalized_count()` are finalized.
    pub fn finalized_count(&self) -> u64 {
        self.watermark_ms / self.window_width_ms
    }

    pub fn is_finalized(&self, window: u64) -> bool {
        window < self.finalized_count()
    }

    /// Raises the watermark for an observed timestamp and returns the windows
    /// this call finalized (possibly empty).
    pub fn advance_watermark(&mut self, ts_ms: u64) -> Range<u64> {
        let before = self.finalized_count();
        self.watermark_ms = self
            .watermark_ms
            .max(ts_ms.saturating_sub(self.skew_allowance_ms));
        before..self.finalized_count()
    }

    pub fn route(&self, ts_ms: u64) -> Routing {
        let window = self.assign_window(ts_ms);
        let open = self.finalized_count();
        if window < open {
            Routing::Late {
                window,
                applied_to: open,
            }
        } else {
            Routing::OnTime(window)
        }
    }
}
