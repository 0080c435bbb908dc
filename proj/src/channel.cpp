#include "birdsim/channel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <sstream>

#include "birdsim/error.hpp"

namespace birdsim {

const char* to_string(LinkBand band) {
  switch (band) {
    case LinkBand::LowAltitude: return "LowAltitude";
    case LinkBand::HighAltitude: return "HighAltitude";
    case LinkBand::Rotation: return "Rotation";
  }
  return "?";
}

const char* to_string(Direction direction) { return direction == Direction::UL ? "UL" : "DL"; }

std::optional<LinkBand> parse_link_band(std::string_view text) {
  if (text == "LowAltitude" || text == "low") return LinkBand::LowAltitude;
  if (text == "HighAltitude" || text == "high") return LinkBand::HighAltitude;
  if (text == "Rotation" || text == "rotation") return LinkBand::Rotation;
  return std::nullopt;
}

BandTable default_link_params() {
  constexpr double kUlStd = 11.83;
  constexpr double kDlStd = 72.09;
  return {{
      {LinkBand::LowAltitude, 356.77, 48.13, 20.06, kDlStd, kUlStd},
      {LinkBand::HighAltitude, 264.62, 37.12, 22.28, kDlStd, kUlStd},
      {LinkBand::Rotation, 339.97, 57.99, 19.8, kDlStd, kUlStd},
  }};
}

LinkBand band_for(double altitude, bool rotating) {
  if (!(altitude >= 0.0 && altitude <= kMaxMeasuredAltitude)) {
    std::ostringstream msg;
    msg << "altitude " << altitude << " m is outside the measured range [0, 100] m";
    throw Error(ErrorCode::OutOfMeasuredRange, msg.str());
  }
  if (rotating) return LinkBand::Rotation;
  return altitude < kBandSplitAltitude ? LinkBand::LowAltitude : LinkBand::HighAltitude;
}

LinkModel::LinkModel() : bands_(default_link_params()) {}

LinkModel::LinkModel(BandTable bands, std::uint64_t noise_seed, int attachment)
    : bands_(bands), noise_seed_(noise_seed), attachment_(attachment) {
  for (std::size_t i = 0; i < bands_.size(); ++i) {
    const auto& b = bands_[i];
    if (static_cast<std::size_t>(b.band) != i) {
      throw Error(ErrorCode::InvalidArgument, "band table out of order");
    }
    if (!(b.dl_mean > 0.0 && b.ul_mean > 0.0 && b.rtt_mean > 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string("band ") + to_string(b.band) + ": means must be > 0");
    }
    if (!(b.dl_std >= 0.0 && b.ul_std >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string("band ") + to_string(b.band) + ": stds must be >= 0");
    }
  }
}

void LinkModel::set_variance_scale(double scale) {
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::InvalidArgument, "variance scale must be >= 0");
  }
  variance_scale_ = scale;
}

void LinkModel::set_floor_mbps(double floor) {
  if (!(floor > 0.0)) throw Error(ErrorCode::InvalidArgument, "throughput floor must be > 0");
  floor_mbps_ = floor;
}

void LinkModel::set_one_way_fraction(double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "one-way fraction must be in (0, 1]");
  }
  one_way_fraction_ = fraction;
}

LinkModel LinkModel::mean_only() const {
  LinkModel copy = *this;
  copy.variance_scale_ = 0.0;
  return copy;
}

LinkSample LinkModel::sample(double t, const FlightState& flight, Direction direction) const {
  const LinkBand band = band_for(flight.altitude, flight.rotating);
  const LinkBandParams& p = params(band);

  LinkSample s;
  s.t = t;
  s.direction = direction;
  s.band = band;
  s.one_way_delay = p.rtt_mean * one_way_fraction_;

  const double sigma = p.stddev(direction) * variance_scale_;
  double rate = p.mean(direction);
  if (sigma > 0.0) {
    const auto t_bits = std::bit_cast<std::uint64_t>(t);
    std::seed_seq seq{static_cast<std::uint32_t>(noise_seed_),
                      static_cast<std::uint32_t>(noise_seed_ >> 32),
                      static_cast<std::uint32_t>(t_bits),
                      static_cast<std::uint32_t>(t_bits >> 32),
                      static_cast<std::uint32_t>(direction),
                      static_cast<std::uint32_t>(band)};
    std::mt19937_64 engine(seq);
    std::normal_distribution<double> noise(rate, sigma);
    rate = noise(engine);
  }
  s.throughput = std::max(rate, floor_mbps_);
  return s;
}

LinkSample sample_throughput(const LinkModel& link, double t, double altitude, bool rotating,
                             Direction direction) {
  return link.sample(t, FlightState{altitude, rotating}, direction);
}

TransferResult transfer(double payload_bits, const LinkModel& link, double t,
                        const FlightState& flight, Direction direction) {
  if (!(payload_bits >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "payload must be >= 0");
  }
  const LinkSample s = link.sample(t, flight, direction);
  TransferResult r;
  r.seconds = s.one_way_delay / 1000.0;
  if (payload_bits > 0.0) r.seconds += payload_bits / (s.throughput * 1e6);
  r.sample = s;
  return r;
}

double transfer_time(double payload_bits, const LinkModel& link, double t, double altitude,
                     bool rotating, Direction direction) {
  return transfer(payload_bits, link, t, FlightState{altitude, rotating}, direction).seconds;
}

double GroundLink::transfer_time(double payload_bits) const {
  if (!(payload_bits >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "payload must be >= 0");
  }
  double seconds = one_way_delay_ms / 1000.0;
  if (payload_bits > 0.0) seconds += payload_bits / (throughput_mbps * 1e6);
  return seconds;
}

TransferResult Network::hop(int from, int to, double payload_bits, double t,
                            const FlightState& flight) const {
  if (from == to) return {};
  if (from == uav.attachment()) return transfer(payload_bits, uav, t, flight, Direction::UL);
  if (to == uav.attachment()) return transfer(payload_bits, uav, t, flight, Direction::DL);
  return {ground.transfer_time(payload_bits), std::nullopt};
}

FeasibilityReport assess_uplink(double bitrate_mbps, LinkBand band, const BandTable& bands,
                                double margin) {
  if (!(bitrate_mbps > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "bitrate must be > 0");
  }
  FeasibilityReport r;
  r.bitrate = bitrate_mbps;
  r.band = band;
  r.mean_uplink = bands[static_cast<std::size_t>(band)].ul_mean;
  r.headroom = r.mean_uplink - bitrate_mbps;
  r.sustainable = r.headroom > margin;
  return r;
}

}  // namespace birdsim
