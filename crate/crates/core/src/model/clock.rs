use crate::scalar::Scalar;

/// Splits `(0, T]` into `f` half-open segments `((j-1)T/f, jT/f]` and pairs
/// them into windows `(t_{2i-1}, t_{2i})`. Segment and window numbers are
/// 1-based, matching the usual notation; with odd `f` the last window holds
/// the single segment `t_f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentClock {
    horizon: Scalar,
    segments: u32,
    length: Scalar,
}

/// One plan/serve pair of the segmented schedule: the planning segment starts
/// at `plan_start`, the serving segment is `[serve_start, serve_end]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phase {
    pub plan_segment: u32,
    pub serve_segment: u32,
    pub plan_start: Scalar,
    pub serve_start: Scalar,
    pub serve_end: Scalar,
}

impl SegmentClock {
    pub fn new(horizon: Scalar, segments: u32) -> Self {
        assert!(segments >= 1, "at least one segment");
        let length = &horizon / Scalar::from_int(segments as i64);
        SegmentClock {
            horizon,
            segments,
            length,
        }
    }

    pub fn horizon(&self) -> &Scalar {
        &self.horizon
    }

    pub fn segments(&self) -> u32 {
        self.segments
    }

    pub fn segment_length(&self) -> &Scalar {
        &self.length
    }

    /// Window count, `ceil(f/2)`.
    pub fn windows(&self) -> u32 {
        self.segments.div_ceil(2)
    }

    pub fn segment_start(&self, j: u32) -> Scalar {
        &self.length * Scalar::from_int(j as i64 - 1)
    }

    pub fn segment_end(&self, j: u32) -> Scalar {
        &self.length * Scalar::from_int(j as i64)
    }

    /// Segment containing a time in `(0, T]`; a time exactly on a boundary
    /// `jT/f` belongs to segment `j`. Time 0 is mapped to segment 1.
    pub fn segment_of(&self, time: &Scalar) -> Option<u32> {
        if time.is_negative() || time > &self.horizon {
            return None;
        }
        if time.is_zero() {
            return Some(1);
        }
        let j = (time / &self.length).ceil();
        let j: u32 = j.try_into().ok()?;
        Some(j.clamp(1, self.segments))
    }

    pub fn window_of_segment(&self, j: u32) -> u32 {
        j.div_ceil(2)
    }

    pub fn window_of(&self, time: &Scalar) -> Option<u32> {
        self.segment_of(time).map(|j| self.window_of_segment(j))
    }

    /// Segments of window `i`: `(2i-1, Some(2i))`, or `(f, None)` for the
    /// trailing single-segment window when `f` is odd.
    pub fn window_segments(&self, i: u32) -> (u32, Option<u32>) {
        let first = 2 * i - 1;
        let second = 2 * i;
        (first, (second <= self.segments).then_some(second))
    }

    pub fn window_start(&self, i: u32) -> Scalar {
        self.segment_start(2 * i - 1)
    }

    /// Plan/serve pairs of the segmented algorithm: with odd `f` the first
    /// segment is skipped, so serving always ends exactly at `T`.
    pub fn phases(&self) -> Vec<Phase> {
        let mut i = if self.segments % 2 == 1 { 2 } else { 1 };
        let mut out = Vec::new();
        while i < self.segments {
            out.push(Phase {
                plan_segment: i,
                serve_segment: i + 1,
                plan_start: self.segment_start(i),
                serve_start: self.segment_start(i + 1),
                serve_end: self.segment_end(i + 1),
            });
            i += 2;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_belongs_to_earlier_segment() {
        let c = SegmentClock::new(Scalar::from_int(12), 4);
        assert_eq!(c.segment_of(&Scalar::from_int(3)), Some(1));
        assert_eq!(c.segment_of(&Scalar::new(301, 100)), Some(2));
        assert_eq!(c.segment_of(&Scalar::from_int(12)), Some(4));
        assert_eq!(c.segment_of(&Scalar::from_int(13)), None);
    }

    #[test]
    fn windows_and_phases() {
        let even = SegmentClock::new(Scalar::from_int(12), 4);
        assert_eq!(even.windows(), 2);
        let p: Vec<_> = even
            .phases()
            .iter()
            .map(|p| (p.plan_segment, p.serve_segment))
            .collect();
        assert_eq!(p, vec![(1, 2), (3, 4)]);

        let odd = SegmentClock::new(Scalar::from_int(25), 5);
        assert_eq!(odd.windows(), 3);
        assert_eq!(odd.window_segments(3), (5, None));
        let p: Vec<_> = odd
            .phases()
            .iter()
            .map(|p| (p.plan_segment, p.serve_segment))
            .collect();
        assert_eq!(p, vec![(2, 3), (4, 5)]);
        assert_eq!(odd.phases().last().unwrap().serve_end, Scalar::from_int(25));
    }

    #[test]
    fn segments_tile_horizon() {
        let c = SegmentClock::new(Scalar::new(7, 2), 3);
        assert_eq!(c.segment_start(1), Scalar::zero());
        for j in 1..3 {
            assert_eq!(c.segment_end(j), c.segment_start(j + 1));
        }
        assert_eq!(c.segment_end(3), Scalar::new(7, 2));
    }
}
