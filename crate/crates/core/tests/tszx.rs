use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use termforge::termemu::{Action, Cell, Control, Frame, Style};
use termforge::tszx::*;

fn random_cell(rng: &mut ChaCha8Rng) -> Cell {
    let ch = match rng.gen_range(0..10) {
        0 => char::from_u32(rng.gen_range(0x100..0x3000)).unwrap_or('?'),
        1 => ' ',
        _ => rng.gen_range(b'a'..=b'f') as char,
    };
    let style = if rng.gen_bool(0.7) { Style::PLAIN } else { Style(rng.gen()) };
    Cell::new(ch, style)
}

fn random_action(rng: &mut ChaCha8Rng) -> Action {
    match rng.gen_range(0..4) {
        0 => Action::Backspace,
        1 => Action::Control(Control::Open(format!("f{}.txt", rng.gen_range(0..100)))),
        2 => Action::Control(Control::PageDown),
        _ => Action::Insert(rng.gen_range(b' '..=b'~') as char),
    }
}

/// A stream mixing fresh frames, small edits and exact repeats.
fn random_stream(seed: u64) -> (Vec<Frame>, Vec<Action>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.gen_range(1..40u16);
    let h = rng.gen_range(1..12u16);
    let n = rng.gen_range(0..12);
    let mut frames: Vec<Frame> = Vec::new();
    for _ in 0..n {
        let mut f = match frames.last() {
            Some(p) if rng.gen_bool(0.7) => p.clone(),
            _ => Frame::new(w, h).unwrap(),
        };
        let edits = match rng.gen_range(0..3) {
            0 => 0,
            1 => rng.gen_range(1..4),
            _ => rng.gen_range(0..(w as usize * h as usize) + 1),
        };
        for _ in 0..edits {
            let x = rng.gen_range(0..w as usize);
            let y = rng.gen_range(0..h as usize);
            let c = random_cell(&mut rng);
            let len = rng.gen_range(1..8);
            f.fill(x, y, len, c);
        }
        frames.push(f);
    }
    let actions = (1..frames.len()).map(|_| random_action(&mut rng)).collect();
    (frames, actions)
}

#[test]
fn thousand_random_streams_round_trip() {
    for seed in 0..1000 {
        let (frames, actions) = random_stream(seed);
        let bytes = encode(&frames, &actions).unwrap();
        assert_eq!(decode(&bytes).unwrap(), (frames.clone(), actions), "seed {seed}");
        let r = inspect(&bytes).unwrap();
        let cells = frames.first().map_or(0, |f| f.cells().len()) as u64;
        assert_eq!(r.counts.cells(), r.frames * cells, "seed {seed}");
    }
}

#[test]
fn per_frame_tokens_cover_every_cell() {
    for seed in 0..200 {
        let (frames, actions) = random_stream(seed);
        let bytes = encode(&frames, &actions).unwrap();
        let mut d = Decoder::new(&bytes).unwrap();
        let cells = d.header().cells_per_frame() as u64;
        let mut before = d.counts().cells();
        while d.next_cells().unwrap().is_some() {
            let now = d.counts().cells();
            assert_eq!(now - before, cells);
            before = now;
        }
    }
}

#[test]
fn header_corruption_is_detected() {
    let mut streams: Vec<Vec<u8>> = (0..40).map(random_stream).filter(|(f, _)| !f.is_empty()).map(|(f, a)| encode(&f, &a).unwrap()).collect();
    let big = vec![Frame::new(160, 48).unwrap(); 3];
    streams.push(encode(&big, &[Action::Insert('a'), Action::Insert('b')]).unwrap());
    for (si, s) in streams.iter().enumerate() {
        for i in 0..HEADER_LEN {
            for mask in [0x01u8, 0x02, 0x10, 0x80, 0xff] {
                let mut c = s.clone();
                c[i] ^= mask;
                assert!(decode(&c).is_err(), "stream {si} byte {i} mask {mask:#x} undetected");
            }
        }
    }
}

#[test]
fn identical_frames_compress_past_1000x() {
    let mut f = Frame::new(160, 48).unwrap();
    for y in 0..48 {
        f.put_str(0, y, &format!("{y:>4} some text on this row"), Style::PLAIN, 160);
    }
    let frames = vec![f; 2000];
    let actions = vec![Action::Control(Control::Left); 1999];
    let r = inspect(&encode(&frames, &actions).unwrap()).unwrap();
    assert!(r.ratio > 1000.0, "{r:?}");
}

#[test]
fn all_distinct_cells_compress_below_2x() {
    let cells: Vec<Cell> = (0..7680u32).map(|i| Cell::new(char::from_u32(0x4e00 + i).unwrap(), Style::PLAIN)).collect();
    let f = Frame::from_cells(160, 48, cells).unwrap();
    let r = inspect(&encode(&[f], &[]).unwrap()).unwrap();
    assert!(r.ratio < 2.0, "{r:?}");
    assert_eq!(r.counts.literal_tokens, 7680);
    assert_eq!(r.counts.cells(), 7680);
}

#[test]
fn more_similarity_never_costs_more() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (w, h) = (64u16, 8u16);
    let n = w as usize * h as usize;
    let fresh = |base: u32| -> Vec<Cell> {
        (0..n as u32).map(|i| Cell::new(char::from_u32(base + i).unwrap(), Style::PLAIN)).collect()
    };
    for trial in 0..5 {
        let a = fresh(0x4e00);
        let x = fresh(0x8000 + trial * 1000);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut b = x.clone();
        let mut last = usize::MAX;
        for k in 0..=n {
            if k > 0 {
                b[order[k - 1]] = a[order[k - 1]];
            }
            let frames = [Frame::from_cells(w, h, a.clone()).unwrap(), Frame::from_cells(w, h, b.clone()).unwrap()];
            let size = encode(&frames, &[Action::Insert('a')]).unwrap().len();
            assert!(size <= last, "trial {trial}: size grew at k={k}");
            last = size;
        }
    }
}

proptest! {
    #[test]
    fn arbitrary_cells_round_trip(
        w in 1u16..20,
        h in 1u16..6,
        raw in prop::collection::vec((any::<char>(), any::<u8>()), 0..480),
        frames_n in 0usize..4,
    ) {
        let n = w as usize * h as usize;
        let frames: Vec<Frame> = (0..frames_n)
            .map(|k| {
                let cells = (0..n)
                    .map(|i| raw.get((i + k * 7) % raw.len().max(1)).map_or(Cell::BLANK, |&(c, s)| Cell::new(c, Style(s))))
                    .collect();
                Frame::from_cells(w, h, cells).unwrap()
            })
            .collect();
        let actions: Vec<Action> = (1..frames_n).map(|_| Action::Backspace).collect();
        let bytes = encode(&frames, &actions).unwrap();
        prop_assert_eq!(decode(&bytes).unwrap(), (frames, actions));
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let mut b = b"TSZX\x01\x00".to_vec();
        b.extend(bytes);
        let _ = decode(&b);
    }
}
