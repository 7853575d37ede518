//! Seeded shuffling shared by every split operation.
//!
//! The generator and shuffle are part of the file-format contract: any port
//! that wants to reproduce fold assignments must implement them bit-exactly.
//!
//! * Generator: SplitMix64 with its state initialised to the user seed. Each
//!   call adds `0x9E3779B97F4A7C15` to the state (wrapping) and returns
//!   `z ^ (z >> 31)` where
//!   `z = (s ^ (s >> 30)) * 0xBF58476D1CE4E5B9`,
//!   `z = (z ^ (z >> 27)) * 0x94D049BB133111EB` (wrapping multiplies).
//! * Shuffle: Fisher–Yates from the back. For `i` from `len - 1` down to `1`,
//!   draw `j = next_u64() % (i + 1)` and swap positions `i` and `j`.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = (self.next_u64() % (i as u64 + 1)) as usize;
            items.swap(i, j);
        }
    }
}
