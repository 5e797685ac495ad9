#pragma once

#include "macid/csv.hpp"
#include "macid/device_db.hpp"
#include "macid/identify.hpp"
#include "macid/vulnmap.hpp"

#include <algorithm>
#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace macid {

/// A device whose real identity is known, used to score identification.
struct TruthDevice {
  MacAddress mac;
  std::string vendor;
  std::string product;
  std::string label; // optional display label, e.g. a rack position
};

/// CSV with header `mac,vendor,product[,label]`.
inline auto load_truth(std::istream& in) -> std::vector<TruthDevice> {
  CsvReader reader{in};
  auto header_row = reader.next();
  if (!header_row)
    throw load_error("truth file has no header row");
  const CsvHeader header{*header_row};
  const auto mac_col = header.require("mac");
  const auto vendor_col = header.require("vendor");
  const auto product_col = header.require("product");
  const auto label_col = header.find("label");
  std::vector<TruthDevice> out;
  while (auto row = reader.next()) {
    TruthDevice t;
    try {
      t.mac = parse_mac(trim(field_at(*row, mac_col)));
    } catch (const mac_parse_error& e) {
      throw load_error(std::string("malformed MAC: ") + e.what(),
                       reader.line());
    }
    t.vendor = std::string(trim(field_at(*row, vendor_col)));
    t.product = std::string(trim(field_at(*row, product_col)));
    if (label_col)
      t.label = std::string(trim(field_at(*row, *label_col)));
    out.push_back(std::move(t));
  }
  return out;
}

/// Four outcomes scored against ground truth, plus a guard for a product
/// guess whose vendor does not match the truth vendor either.
enum class Verdict {
  Correct,
  CorrectVendorWrongDevice,
  OnlyVendor,
  NoIdentification,
  WrongVendor,
};

inline auto to_string(Verdict v) -> std::string_view {
  switch (v) {
  case Verdict::Correct:
    return "correct";
  case Verdict::CorrectVendorWrongDevice:
    return "correct_vendor_wrong_device";
  case Verdict::OnlyVendor:
    return "only_vendor";
  case Verdict::NoIdentification:
    return "no_identification";
  case Verdict::WrongVendor:
    break;
  }
  return "wrong_vendor";
}

inline auto same_vendor(std::string_view a, std::string_view b) -> bool {
  return token_overlap(normalize(a), normalize(b)) > 0;
}

inline auto same_product(std::string_view a, std::string_view b) -> bool {
  const auto ta = normalize(a);
  return !ta.empty() && ta == normalize(b);
}

inline auto score(const IdentificationResult& r, const TruthDevice& truth)
    -> Verdict {
  switch (r.category) {
  case Category::ExactOrProductGuess:
    if (!same_vendor(r.match->vendor, truth.vendor))
      return Verdict::WrongVendor;
    return same_product(r.match->product, truth.product)
               ? Verdict::Correct
               : Verdict::CorrectVendorWrongDevice;
  case Category::VendorOnly:
    return Verdict::OnlyVendor;
  case Category::NoIdentification:
    break;
  }
  return Verdict::NoIdentification;
}

struct EvaluationRow {
  TruthDevice truth;
  IdentificationResult result;
  Verdict verdict = Verdict::NoIdentification;
};

struct Evaluation {
  std::vector<EvaluationRow> rows;          // truth devices seen in capture
  std::vector<TruthDevice> not_in_capture;  // listed, not scored
  std::size_t correct = 0;

  auto scored() const noexcept -> std::size_t { return rows.size(); }

  auto count(Verdict v) const -> std::size_t {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(),
                      [v](const EvaluationRow& r) { return r.verdict == v; }));
  }

  /// Correct identifications over scored devices.
  auto identification_rate() const noexcept -> double {
    return rows.empty() ? 0.0
                        : static_cast<double>(correct) /
                              static_cast<double>(rows.size());
  }

  /// Scored devices over all truth devices.
  auto discovery_rate() const noexcept -> double {
    const auto total = rows.size() + not_in_capture.size();
    return total == 0 ? 0.0
                      : static_cast<double>(rows.size()) /
                            static_cast<double>(total);
  }
};

struct EvaluateOptions {
  MacDistance threshold = ma_l_span;
  /// Remove the truth devices from the database before matching, so each
  /// one must be recognised from its neighbours.
  bool blacklist_truth = true;
};

inline auto evaluate(const DeviceDatabase& db, const Registry& reg,
                     const std::vector<TruthDevice>& truth,
                     const MacSet& observed, EvaluateOptions opts = {})
    -> Evaluation {
  MacSet truth_macs;
  for (const auto& t : truth)
    truth_macs.insert(t.mac);
  const auto pool = opts.blacklist_truth ? db.without(truth_macs) : db;

  Evaluation ev;
  for (const auto& t : truth) {
    if (!observed.contains(t.mac)) {
      ev.not_in_capture.push_back(t);
      continue;
    }
    auto r = identify(pool, reg, t.mac, opts.threshold);
    const auto v = score(r, t);
    if (v == Verdict::Correct)
      ++ev.correct;
    ev.rows.push_back({t, std::move(r), v});
  }
  return ev;
}

} // namespace macid
