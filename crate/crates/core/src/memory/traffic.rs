use serde::{Deserialize, Serialize};

/// What a DRAM transfer carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Left,
    Right,
    Partial,
    Final,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Read,
    Write,
}

/// Bytes split by category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryBytes {
    pub left: u64,
    pub right: u64,
    pub partial: u64,
    #[serde(rename = "final")]
    pub final_: u64,
}

impl CategoryBytes {
    pub fn get(&self, c: Category) -> u64 {
        match c {
            Category::Left => self.left,
            Category::Right => self.right,
            Category::Partial => self.partial,
            Category::Final => self.final_,
        }
    }

    fn slot(&mut self, c: Category) -> &mut u64 {
        match c {
            Category::Left => &mut self.left,
            Category::Right => &mut self.right,
            Category::Partial => &mut self.partial,
            Category::Final => &mut self.final_,
        }
    }

    pub fn total(&self) -> u64 {
        self.left + self.right + self.partial + self.final_
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrafficCounters {
    pub read: CategoryBytes,
    pub write: CategoryBytes,
    pub channel_busy: Vec<u64>,
    pub hit_lines: u64,
    pub miss_lines: u64,
}

impl TrafficCounters {
    pub fn new(channels: usize) -> Self {
        Self { channel_busy: vec![0; channels], ..Self::default() }
    }

    pub fn record(&mut self, dir: Direction, cat: Category, bytes: u64) {
        let side = match dir {
            Direction::Read => &mut self.read,
            Direction::Write => &mut self.write,
        };
        *side.slot(cat) += bytes;
    }

    pub fn total_bytes(&self) -> u64 {
        self.read.total() + self.write.total()
    }

    /// Fraction of prefetch-buffer line lookups that hit, absent if none happened.
    pub fn hit_rate(&self) -> Option<f64> {
        let total = self.hit_lines + self.miss_lines;
        (total > 0).then(|| self.hit_lines as f64 / total as f64)
    }
}

/// Free-standing form of [`TrafficCounters::hit_rate`].
pub fn hit_rate(counters: &TrafficCounters) -> Option<f64> {
    counters.hit_rate()
}
