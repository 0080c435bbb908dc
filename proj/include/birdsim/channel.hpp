#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace birdsim {

// Measurement covers 0-100 m above ground.
inline constexpr double kMaxMeasuredAltitude = 100.0;
inline constexpr double kBandSplitAltitude = 50.0;

enum class LinkBand { LowAltitude = 0, HighAltitude = 1, Rotation = 2 };
enum class Direction { UL, DL };

const char* to_string(LinkBand band);
const char* to_string(Direction direction);
std::optional<LinkBand> parse_link_band(std::string_view text);

/// Throughput statistics of one flight regime. Throughputs in Mbps, RTT in ms.
struct LinkBandParams {
  LinkBand band = LinkBand::LowAltitude;
  double dl_mean = 0.0;
  double ul_mean = 0.0;
  double rtt_mean = 0.0;
  double dl_std = 0.0;
  double ul_std = 0.0;

  double mean(Direction d) const { return d == Direction::UL ? ul_mean : dl_mean; }
  double stddev(Direction d) const { return d == Direction::UL ? ul_std : dl_std; }
};

using BandTable = std::array<LinkBandParams, 3>;  // indexed by LinkBand

/// Field-measured aerial 5G values: per-band means and a shared spread of
/// 11.83 Mbps uplink / 72.09 Mbps downlink.
BandTable default_link_params();

/// Rotation wins over altitude; otherwise [0, 50) is low and [50, 100] high.
/// Throws OutOfMeasuredRange outside [0, 100] m.
LinkBand band_for(double altitude, bool rotating);

struct FlightState {
  double altitude = 0.0;
  bool rotating = false;
};

struct LinkSample {
  double t = 0.0;
  Direction direction = Direction::UL;
  LinkBand band = LinkBand::LowAltitude;
  double throughput = 0.0;     // Mbps
  double one_way_delay = 0.0;  // ms
};

/// Stochastic 5G link of the airborne node. A sample is a pure function of
/// (seed, t, direction, band), so replays and parallel runs agree bit for bit.
class LinkModel {
 public:
  LinkModel();
  LinkModel(BandTable bands, std::uint64_t noise_seed, int attachment = 0);

  const LinkBandParams& params(LinkBand band) const {
    return bands_[static_cast<std::size_t>(band)];
  }
  const BandTable& bands() const { return bands_; }
  std::uint64_t noise_seed() const { return noise_seed_; }
  int attachment() const { return attachment_; }

  double variance_scale() const { return variance_scale_; }
  double floor_mbps() const { return floor_mbps_; }
  double one_way_fraction() const { return one_way_fraction_; }

  void set_variance_scale(double scale);
  void set_floor_mbps(double floor);
  // Fraction of the measured latency charged as one-way delay (0.5 = RTT/2).
  void set_one_way_fraction(double fraction);
  void set_noise_seed(std::uint64_t seed) { noise_seed_ = seed; }

  /// Same link with all spread removed; samples return the band means.
  LinkModel mean_only() const;

  LinkSample sample(double t, const FlightState& flight, Direction direction) const;

 private:
  BandTable bands_;
  std::uint64_t noise_seed_ = 0;
  int attachment_ = 0;
  double variance_scale_ = 1.0;
  double floor_mbps_ = 1.0;
  double one_way_fraction_ = 0.5;
};

LinkSample sample_throughput(const LinkModel& link, double t, double altitude, bool rotating,
                             Direction direction);

struct TransferResult {
  double seconds = 0.0;
  std::optional<LinkSample> sample;  // empty for same-node or ground hops
};

/// one_way_delay + payload / throughput, one throughput draw per transfer.
TransferResult transfer(double payload_bits, const LinkModel& link, double t,
                        const FlightState& flight, Direction direction);

double transfer_time(double payload_bits, const LinkModel& link, double t, double altitude,
                     bool rotating, Direction direction);

/// Wired path between two terrestrial nodes; deterministic.
struct GroundLink {
  double throughput_mbps = 1000.0;
  double one_way_delay_ms = 5.0;

  double transfer_time(double payload_bits) const;
};

/// Routes a hop between two nodes onto the right medium: the aerial link when
/// the attached UAV sends (UL) or receives (DL), the ground link otherwise.
struct Network {
  LinkModel uav;
  GroundLink ground;

  TransferResult hop(int from, int to, double payload_bits, double t,
                     const FlightState& flight) const;
  Network mean_only() const { return {uav.mean_only(), ground}; }
};

struct FeasibilityReport {
  double bitrate = 0.0;
  LinkBand band = LinkBand::LowAltitude;
  double mean_uplink = 0.0;
  double headroom = 0.0;  // mean_uplink - bitrate
  bool sustainable = false;
};

/// A stream is sustainable when mean uplink exceeds the bitrate by more than
/// `margin` Mbps (strictly).
FeasibilityReport assess_uplink(double bitrate_mbps, LinkBand band, const BandTable& bands,
                                double margin = 0.0);

}  // namespace birdsim
