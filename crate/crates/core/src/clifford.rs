//! The 24-element single-qubit Clifford group (modulo global phase).
//!
//! Elements are numbered by a breadth-first enumeration from the identity:
//! index 0 is the identity, and each dequeued element `e` spawns `H·e` and
//! then `S·e` (gate applied after `e`), new elements taking the next free
//! index. The numbering is frozen; seeded runs depend on it. The first few
//! entries are 0 = I, 1 = H, 2 = S, 3 = S·H, 4 = H·S, 5 = S·S = Z.

use std::fmt;
use std::sync::LazyLock;

use num_complex::Complex64;

use crate::linalg::Mat2;
use crate::pauli::{PauliLetter, SignedPauli};

pub const CLIFFORD_COUNT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SingleQubitClifford(u8);

struct Entry {
    x_image: SignedPauli,
    z_image: SignedPauli,
    y_image: SignedPauli,
    matrix: Mat2,
}

struct Table {
    entries: Vec<Entry>,
    compose: [[u8; CLIFFORD_COUNT]; CLIFFORD_COUNT],
    inverse: [u8; CLIFFORD_COUNT],
    // [signed pauli slot][0 = Z-type target, 1 = X-type target]
    to_axis: Vec<[Vec<SingleQubitClifford>; 2]>,
    to_plus_z: Vec<Vec<SingleQubitClifford>>,
}

fn y_image(x: SignedPauli, z: SignedPauli) -> SignedPauli {
    // Y = i X Z, so C(Y) = i C(X) C(Z).
    let (k, letter) = x.product(z);
    let k = (k + 1) % 4;
    debug_assert!(k % 2 == 0, "Clifford images must anticommute");
    SignedPauli::new(letter, k == 2)
}

fn apply_images(x: SignedPauli, z: SignedPauli, y: SignedPauli, p: SignedPauli) -> SignedPauli {
    let img = match p.letter {
        PauliLetter::I => return p,
        PauliLetter::X => x,
        PauliLetter::Y => y,
        PauliLetter::Z => z,
    };
    SignedPauli::new(img.letter, img.negative ^ p.negative)
}

/// Slot 0..6 for the six non-identity signed Paulis.
fn slot(p: SignedPauli) -> usize {
    let l = match p.letter {
        PauliLetter::X => 0,
        PauliLetter::Y => 1,
        PauliLetter::Z => 2,
        PauliLetter::I => panic!("identity has no slot"),
    };
    2 * l + p.negative as usize
}

fn build() -> Table {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let h = Mat2([
        [Complex64::new(s2, 0.0), Complex64::new(s2, 0.0)],
        [Complex64::new(s2, 0.0), Complex64::new(-s2, 0.0)],
    ]);
    let s = Mat2([[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)]]);
    use PauliLetter::*;
    // Generator actions on (X, Z): H swaps them, S sends X -> Y and fixes Z.
    let gens = [
        (h, SignedPauli::plus(Z), SignedPauli::plus(X)),
        (s, SignedPauli::plus(Y), SignedPauli::plus(Z)),
    ];

    let mut entries = vec![Entry {
        x_image: SignedPauli::plus(X),
        z_image: SignedPauli::plus(Z),
        y_image: SignedPauli::plus(Y),
        matrix: Mat2::IDENTITY,
    }];
    let mut head = 0;
    while head < entries.len() {
        for (gm, gx, gz) in &gens {
            let gy = y_image(*gx, *gz);
            let e = &entries[head];
            let x_image = apply_images(*gx, *gz, gy, e.x_image);
            let z_image = apply_images(*gx, *gz, gy, e.z_image);
            if entries.iter().any(|o| o.x_image == x_image && o.z_image == z_image) {
                continue;
            }
            let matrix = gm.mul(&e.matrix);
            entries.push(Entry { x_image, z_image, y_image: y_image(x_image, z_image), matrix });
        }
        head += 1;
    }
    assert_eq!(entries.len(), CLIFFORD_COUNT);

    let find = |x: SignedPauli, z: SignedPauli| -> u8 {
        entries.iter().position(|e| e.x_image == x && e.z_image == z).expect("group closure") as u8
    };
    let mut compose = [[0u8; CLIFFORD_COUNT]; CLIFFORD_COUNT];
    let mut inverse = [0u8; CLIFFORD_COUNT];
    for (a, ea) in entries.iter().enumerate() {
        for (b, eb) in entries.iter().enumerate() {
            // a first, then b.
            let x = apply_images(eb.x_image, eb.z_image, eb.y_image, ea.x_image);
            let z = apply_images(eb.x_image, eb.z_image, eb.y_image, ea.z_image);
            compose[a][b] = find(x, z);
        }
    }
    for a in 0..CLIFFORD_COUNT {
        inverse[a] = (0..CLIFFORD_COUNT).find(|&b| compose[a][b] == 0).expect("inverse exists") as u8;
    }

    let signed: Vec<SignedPauli> =
        [X, Y, Z].iter().flat_map(|&l| [SignedPauli::new(l, false), SignedPauli::new(l, true)]).collect();
    let mut to_axis = vec![[Vec::new(), Vec::new()]; 6];
    let mut to_plus_z = vec![Vec::new(); 6];
    for p in &signed {
        for (c, e) in entries.iter().enumerate() {
            let img = apply_images(e.x_image, e.z_image, e.y_image, *p);
            let c = SingleQubitClifford(c as u8);
            match img.letter {
                Z => to_axis[slot(*p)][0].push(c),
                X => to_axis[slot(*p)][1].push(c),
                _ => {}
            }
            if img == SignedPauli::plus(Z) {
                to_plus_z[slot(*p)].push(c);
            }
        }
    }
    Table { entries, compose, inverse, to_axis, to_plus_z }
}

static TABLE: LazyLock<Table> = LazyLock::new(build);

impl SingleQubitClifford {
    pub const IDENTITY: SingleQubitClifford = SingleQubitClifford(0);
    pub const H: SingleQubitClifford = SingleQubitClifford(1);
    pub const S: SingleQubitClifford = SingleQubitClifford(2);

    pub fn new(index: usize) -> Option<Self> {
        (index < CLIFFORD_COUNT).then_some(SingleQubitClifford(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = SingleQubitClifford> {
        (0..CLIFFORD_COUNT as u8).map(SingleQubitClifford)
    }

    pub fn from_images(x_image: SignedPauli, z_image: SignedPauli) -> Option<Self> {
        TABLE
            .entries
            .iter()
            .position(|e| e.x_image == x_image && e.z_image == z_image)
            .map(|i| SingleQubitClifford(i as u8))
    }

    /// The Pauli gate `letter` as a Clifford element.
    pub fn pauli(letter: PauliLetter) -> Self {
        use PauliLetter::*;
        let (x_neg, z_neg) = match letter {
            I => (false, false),
            X => (false, true),
            Y => (true, true),
            Z => (true, false),
        };
        Self::from_images(SignedPauli::new(X, x_neg), SignedPauli::new(Z, z_neg)).expect("Paulis are Clifford")
    }

    pub fn x_image(self) -> SignedPauli {
        TABLE.entries[self.index()].x_image
    }

    pub fn z_image(self) -> SignedPauli {
        TABLE.entries[self.index()].z_image
    }

    /// `c · p · c†`.
    pub fn conjugate(self, p: SignedPauli) -> SignedPauli {
        let e = &TABLE.entries[self.index()];
        apply_images(e.x_image, e.z_image, e.y_image, p)
    }

    /// The element that applies `self` first and `next` second (unitary `next·self`).
    pub fn then(self, next: SingleQubitClifford) -> SingleQubitClifford {
        SingleQubitClifford(TABLE.compose[self.index()][next.index()])
    }

    pub fn inverse(self) -> SingleQubitClifford {
        SingleQubitClifford(TABLE.inverse[self.index()])
    }

    /// A unitary representative; the global phase is whatever the H/S word produces.
    pub fn matrix(self) -> Mat2 {
        TABLE.entries[self.index()].matrix
    }

    pub fn is_pauli(self) -> bool {
        PauliLetter::ALL.iter().any(|&l| Self::pauli(l) == self)
    }

    /// Elements sending the state stabilized by `p` to a Z eigenstate
    /// (`to_x = false`) or an X eigenstate (`to_x = true`); eight each.
    pub(crate) fn mapping_to_axis(p: SignedPauli, to_x: bool) -> &'static [SingleQubitClifford] {
        &TABLE.to_axis[slot(p)][to_x as usize]
    }

    /// Elements with `c · p · c† = +Z`; four each.
    pub(crate) fn mapping_to_plus_z(p: SignedPauli) -> &'static [SingleQubitClifford] {
        &TABLE.to_plus_z[slot(p)]
    }
}

impl fmt::Display for SingleQubitClifford {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}[X->{}, Z->{}]", self.0, self.x_image(), self.z_image())
    }
}

/// Signed image of `p` under conjugation by `c`.
pub fn conjugate_through_clifford(c: SingleQubitClifford, p: SignedPauli) -> SignedPauli {
    c.conjugate(p)
}
