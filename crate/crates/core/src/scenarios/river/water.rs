//! Water masses and the river/sewer transport model.

use serde::{Deserialize, Serialize};

/// Pollutants tracked per water mass, in this order.
pub const POLLUTANTS: [&str; 5] = ["SS", "BOD", "COD", "TN", "TP"];

/// Fraction of each pollutant removed while water moves one river section.
pub const CLEANING_RATES: [f64; 5] = [0.20, 0.15, 0.15, 0.10, 0.05];

pub type Concentrations = [f64; 5];

/// A volume of water (m³) with pollutant concentrations (g/m³).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WaterMass {
    pub volume: f64,
    pub conc: Concentrations,
}

impl WaterMass {
    pub const ZERO: WaterMass = WaterMass {
        volume: 0.0,
        conc: [0.0; 5],
    };

    pub fn new(volume: f64, conc: Concentrations) -> Self {
        WaterMass { volume, conc }
    }

    pub fn fresh(volume: f64) -> Self {
        WaterMass::new(volume, [0.0; 5])
    }

    pub fn is_empty(&self) -> bool {
        self.volume <= 0.0
    }

    /// Pollutant loads in kg.
    pub fn loads_kg(&self) -> [f64; 5] {
        self.conc.map(|c| c * self.volume / 1000.0)
    }

    /// Each concentration scaled by `1 - rate`.
    pub fn reduced(&self, rates: &[f64; 5]) -> WaterMass {
        let mut conc = self.conc;
        for (c, r) in conc.iter_mut().zip(rates) {
            *c *= 1.0 - r;
        }
        WaterMass::new(self.volume, conc)
    }

    /// Splits off up to `volume` m³ with the same concentrations.
    pub fn take(&mut self, volume: f64) -> WaterMass {
        let v = volume.clamp(0.0, self.volume);
        self.volume -= v;
        let part = WaterMass::new(v, self.conc);
        if self.volume <= 0.0 {
            *self = WaterMass::ZERO;
        }
        part
    }

    pub fn absorb(&mut self, other: WaterMass) {
        *self = mix(*self, other);
    }
}

/// Merges two masses. Concentrations are volume-weighted means; two empty
/// masses give the zero mass.
pub fn mix(a: WaterMass, b: WaterMass) -> WaterMass {
    let volume = a.volume + b.volume;
    if volume <= 0.0 {
        return WaterMass::ZERO;
    }
    let mut conc = [0.0; 5];
    for (i, c) in conc.iter_mut().enumerate() {
        *c = (a.conc[i] * a.volume + b.conc[i] * b.volume) / volume;
    }
    WaterMass { volume, conc }
}

/// Moves every river mass one section downstream, cleaning it on the way.
/// The last section's mass leaves the river and is returned.
pub fn river_advance(sections: &mut [WaterMass], headstream: WaterMass, rates: &[f64; 5]) -> WaterMass {
    let Some(last) = sections.last().copied() else {
        return headstream;
    };
    for i in (1..sections.len()).rev() {
        sections[i] = sections[i - 1].reduced(rates);
    }
    sections[0] = headstream;
    last.reduced(rates)
}

/// Moves sewer water one segment towards the plant. Index 0 is the segment
/// next to the plant; its content is returned as the arrival. No cleaning.
pub fn sewer_advance(line: &mut [WaterMass]) -> WaterMass {
    let Some(&arrived) = line.first() else {
        return WaterMass::ZERO;
    };
    line.rotate_left(1);
    if let Some(last) = line.last_mut() {
        *last = WaterMass::ZERO;
    }
    arrived
}
