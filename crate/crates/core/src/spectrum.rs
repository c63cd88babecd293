//! Flex-grid spectrum accounting: per-link slot bitmaps, continuity-
//! respecting first-fit assignment, and occupancy metrics.
//!
//! The grid divides each amplification band into 12.5 GHz slots. Slot
//! indices run low-to-high frequency through the C-band window first,
//! then (when enabled) the L-band window, so index 384 is the first
//! L-band slot under the default band plan. A media channel occupies the
//! same contiguous slot range on every link it crosses and never
//! straddles a band boundary.
//!
//! The headline occupancy metric converts the highest occupied slot into
//! equivalent 50 GHz wavelengths: four slots per wavelength, maximised
//! over links. A C-band window of 384 slots therefore saturates at 96;
//! any spill into the L-band window reads as 97 or more.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qot::BandPlan;
use crate::topology::NetworkTopology;
use crate::units::SLOT_WIDTH_GHZ;
use crate::Real;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("link {0:?} is not part of the grid")]
    UnknownLink(String),
    #[error("slot range [{start}, {end}) does not fit a band window")]
    OutOfWindow { start: usize, end: usize },
    #[error("slot {slot} on link {link:?} is already occupied")]
    Occupied { link: String, slot: usize },
    #[error("a media channel needs at least one slot")]
    EmptyChannel,
    #[error("a media channel needs at least one link")]
    NoLinks,
}

/// Contiguous slots reserved for one lightpath across its route.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaChannel {
    pub owner: String,
    pub links: Vec<String>,
    pub start_slot: usize,
    pub slot_count: usize,
}

/// Whole slots needed to carry `bandwidth_ghz`.
pub fn slots_needed(bandwidth_ghz: Real) -> usize {
    (bandwidth_ghz / SLOT_WIDTH_GHZ).ceil() as usize
}

/// Per-link occupancy snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkOccupancy {
    pub occupied_slots: usize,
    pub highest_slot: Option<usize>,
    /// ceil((highest + 1) / 4): 50 GHz wavelengths an equivalent
    /// fixed-grid system would burn to reach the same top slot.
    pub equivalent_50ghz_wavelengths: usize,
}

/// Network-wide spectrum state.
#[derive(Debug, Clone)]
pub struct SpectrumGrid {
    slots_per_link: usize,
    /// Window boundaries as [start, end) slot ranges, in scan order.
    windows: Vec<(usize, usize)>,
    occupancy: BTreeMap<String, Vec<bool>>,
    channels: Vec<MediaChannel>,
}

impl SpectrumGrid {
    pub fn new(topology: &NetworkTopology, band: &BandPlan) -> Self {
        let c = band.c_slots();
        let l = band.l_slots();
        let mut windows = vec![(0, c)];
        if l > 0 {
            windows.push((c, c + l));
        }
        let slots_per_link = c + l;
        let occupancy = topology
            .links()
            .iter()
            .map(|link| (link.id.clone(), vec![false; slots_per_link]))
            .collect();
        Self {
            slots_per_link,
            windows,
            occupancy,
            channels: Vec::new(),
        }
    }

    pub fn slots_per_link(&self) -> usize {
        self.slots_per_link
    }

    pub fn channels(&self) -> &[MediaChannel] {
        &self.channels
    }

    fn bitmap(&self, link: &str) -> Result<&Vec<bool>, SpectrumError> {
        self.occupancy
            .get(link)
            .ok_or_else(|| SpectrumError::UnknownLink(link.to_string()))
    }

    fn range_free(&self, links: &[String], start: usize, count: usize) -> Result<bool, SpectrumError> {
        for link in links {
            let bits = self.bitmap(link)?;
            if bits[start..start + count].iter().any(|&b| b) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Lowest start slot where `count` contiguous slots are free on every
    /// link, confined to a single band window. `None` when blocked.
    pub fn first_fit(&self, links: &[String], count: usize) -> Result<Option<usize>, SpectrumError> {
        if count == 0 {
            return Err(SpectrumError::EmptyChannel);
        }
        if links.is_empty() {
            return Err(SpectrumError::NoLinks);
        }
        for link in links {
            self.bitmap(link)?;
        }
        for &(win_start, win_end) in &self.windows {
            if count > win_end - win_start {
                continue;
            }
            for start in win_start..=win_end - count {
                if self.range_free(links, start, count)? {
                    return Ok(Some(start));
                }
            }
        }
        Ok(None)
    }

    /// Reserves `[start, start + count)` on every link for `owner`.
    pub fn assign(
        &mut self,
        owner: impl Into<String>,
        links: &[String],
        start: usize,
        count: usize,
    ) -> Result<MediaChannel, SpectrumError> {
        if count == 0 {
            return Err(SpectrumError::EmptyChannel);
        }
        if links.is_empty() {
            return Err(SpectrumError::NoLinks);
        }
        let end = start + count;
        if !self
            .windows
            .iter()
            .any(|&(w0, w1)| start >= w0 && end <= w1)
        {
            return Err(SpectrumError::OutOfWindow { start, end });
        }
        for link in links {
            let bits = self.bitmap(link)?;
            if let Some(slot) = (start..end).find(|&s| bits[s]) {
                return Err(SpectrumError::Occupied {
                    link: link.clone(),
                    slot,
                });
            }
        }
        for link in links {
            let bits = self.occupancy.get_mut(link).expect("validated above");
            bits[start..end].fill(true);
        }
        let channel = MediaChannel {
            owner: owner.into(),
            links: links.to_vec(),
            start_slot: start,
            slot_count: count,
        };
        self.channels.push(channel.clone());
        Ok(channel)
    }

    /// First-fit search and assignment in one step; `None` when blocked.
    pub fn allocate_first_fit(
        &mut self,
        owner: impl Into<String>,
        links: &[String],
        count: usize,
    ) -> Result<Option<MediaChannel>, SpectrumError> {
        match self.first_fit(links, count)? {
            Some(start) => Ok(Some(self.assign(owner, links, start, count)?)),
            None => Ok(None),
        }
    }

    pub fn link_occupancy(&self, link: &str) -> Result<LinkOccupancy, SpectrumError> {
        let bits = self.bitmap(link)?;
        let occupied_slots = bits.iter().filter(|&&b| b).count();
        let highest_slot = bits.iter().rposition(|&b| b);
        let equivalent = match highest_slot {
            Some(h) => (h + 1).div_ceil(4),
            None => 0,
        };
        Ok(LinkOccupancy {
            occupied_slots,
            highest_slot,
            equivalent_50ghz_wavelengths: equivalent,
        })
    }

    /// Worst-link equivalent 50 GHz wavelength count.
    pub fn max_equivalent_50ghz_wavelengths(&self) -> usize {
        self.occupancy
            .keys()
            .map(|link| {
                self.link_occupancy(link)
                    .expect("key iteration")
                    .equivalent_50ghz_wavelengths
            })
            .max()
            .unwrap_or(0)
    }

    pub fn total_occupied_slots(&self) -> usize {
        self.occupancy
            .values()
            .map(|bits| bits.iter().filter(|&&b| b).count())
            .sum()
    }

    /// Serializable snapshot: per-link channel list in slot order plus
    /// the per-link occupancy summary.
    pub fn dump(&self) -> SpectrumDump {
        let mut per_link: BTreeMap<String, Vec<MediaChannel>> = self
            .occupancy
            .keys()
            .map(|k| (k.clone(), Vec::new()))
            .collect();
        for ch in &self.channels {
            for link in &ch.links {
                per_link.get_mut(link).expect("channel links validated").push(ch.clone());
            }
        }
        for list in per_link.values_mut() {
            list.sort_by_key(|c| c.start_slot);
        }
        SpectrumDump {
            slots_per_link: self.slots_per_link,
            occupancy: self
                .occupancy
                .keys()
                .map(|k| (k.clone(), self.link_occupancy(k).expect("key iteration")))
                .collect(),
            channels_by_link: per_link,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpectrumDump {
    pub slots_per_link: usize,
    pub occupancy: BTreeMap<String, LinkOccupancy>,
    pub channels_by_link: BTreeMap<String, Vec<MediaChannel>>,
}
