//! Protocol modulators derived from the base graphs by attaching post-ops:
//! IEEE 802.15.4 O-QPSK and IEEE 802.11a/g OFDM frames.

mod postop;
pub mod wifi;
pub mod zigbee;

pub use postop::{remove_cyclic_prefix, PostOp};
pub use wifi::{build_wifi_frame, demod_wifi_frame, WifiFrameConfig};
pub use zigbee::{build_oqpsk_zigbee, ZigbeeModulator};
