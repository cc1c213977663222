#include <algorithm>
#include <cmath>
#include <vector>

#include "adapters.hpp"
#include "fcb/error.hpp"

namespace fcb {

const CodecAdapter& adapter_for(CodecId codec) {
    switch (codec) {
        case CodecId::png_resized: return detail::png_resized_adapter();
        case CodecId::jpeg: return detail::jpeg_adapter();
        case CodecId::jpeg2000: return detail::jpeg2000_adapter();
        case CodecId::jpegxl: return detail::jpegxl_adapter();
    }
    throw CodecError("no adapter for codec");
}

std::vector<std::uint8_t> encode_with_param(const ImagePlane& image, const CodecParam& param) {
    if (!param_in_range(param)) {
        throw CodecError(to_string(param.codec) + ": parameter " + param.to_string() + " out of range");
    }
    try {
        return adapter_for(param.codec).encode(image, param);
    } catch (const CodecError&) {
        throw;
    } catch (const std::exception& e) {
        throw CodecError(to_string(param.codec) + " (" + param.to_string() + "): " + e.what());
    }
}

ImagePlane decode(std::span<const std::uint8_t> payload, CodecId codec) {
    if (payload.empty()) throw DecodeError(to_string(codec) + ": empty payload");
    return adapter_for(codec).decode(payload);
}

BudgetSearcher::BudgetSearcher(const ImagePlane& image, CodecId codec, SearchOptions options)
    : image_(image), codec_(codec), options_(options), grid_(grid_for(codec, image)) {}

const std::vector<std::uint8_t>& BudgetSearcher::payload_at(int index) {
    auto it = cache_.find(index);
    if (it == cache_.end()) {
        it = cache_.emplace(index, encode_with_param(image_, grid_.at(index))).first;
    }
    return it->second;
}

long long BudgetSearcher::size_at(int index) {
    return static_cast<long long>(payload_at(index).size());
}

// Coordinate in which log-size is close to linear: log of the scale for
// resizing and ratio codecs, quality itself for JPEG. Increases with index.
double BudgetSearcher::rate_coordinate(int index) const {
    const double v = grid_.at(index).value;
    switch (codec_) {
        case CodecId::png_resized: return std::log(v);
        case CodecId::jpeg: return v;
        case CodecId::jpeg2000:
        case CodecId::jpegxl: return -std::log(v);
    }
    return index;
}

// Index in [first, last] whose coordinate is nearest to x.
int BudgetSearcher::nearest_index(double x, int first, int last) const {
    int a = first, b = last;
    while (a < b) {
        const int m = a + (b - a) / 2;
        if (rate_coordinate(m) < x) a = m + 1; else b = m;
    }
    if (a > first && x - rate_coordinate(a - 1) < rate_coordinate(a) - x) --a;
    return a;
}

int BudgetSearcher::search(long long budget) {
    const int n = grid_.size();
    if (options_.exhaustive) {
        std::optional<int> best;
        long long best_size = -1;
        for (int i = 0; i < n; ++i) {
            const auto s = size_at(i);
            if (s <= budget && s >= best_size) {
                best = i;
                best_size = s;
            }
        }
        if (!best) throw BudgetInfeasible("no grid parameter fits");
        return *best;
    }
    if (size_at(n - 1) <= budget) return n - 1;
    if (size_at(0) > budget) throw BudgetInfeasible("most aggressive parameter overshoots");

    // Invariant: lo fits, hi overshoots. The path depends only on the budget
    // and the sizes, never on what earlier budgets probed, so each cell's
    // result is independent of the ladder. Bisecting over fixed quartile
    // anchors of the rate coordinate first lets budgets share those probes.
    std::vector<int> anchors{0};
    const double x0 = rate_coordinate(0), x1 = rate_coordinate(n - 1);
    for (int k = 1; k < 4; ++k) anchors.push_back(nearest_index(x0 + (x1 - x0) * k / 4, 0, n - 1));
    anchors.push_back(n - 1);
    anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
    std::size_t a = 0, c = anchors.size() - 1;
    while (c - a > 1) {
        const std::size_t m = (a + c) / 2;
        (size_at(anchors[m]) <= budget ? a : c) = m;
    }
    int lo = anchors[a];
    int hi = anchors[c];

    // False position on log-size against the rate coordinate. Size noise
    // makes estimates land repeatedly on one side of the boundary; each such
    // repeat pushes the next probe 1, 2, 4, ... steps past the estimate. If
    // four steps fail to halve the bracket, one plain halving follows.
    const double lb = std::log(static_cast<double>(budget));
    std::vector<int> widths;
    int side = 0, repeats = 0;
    while (hi - lo > 1) {
        int mid = lo + (hi - lo) / 2;
        const bool stalled = widths.size() >= 4 && (hi - lo) * 2 > widths[widths.size() - 4];
        if (!stalled) {
            const double fl = std::log(static_cast<double>(size_at(lo))) - lb;
            const double fh = std::log(static_cast<double>(size_at(hi))) - lb;
            const double xl = rate_coordinate(lo), xh = rate_coordinate(hi);
            mid = nearest_index(xl - fl / (fh - fl) * (xh - xl), lo + 1, hi - 1);
            if (repeats > 0) {
                const int push = 1 << (repeats - 1);
                mid = side < 0 ? std::min(hi - 1, mid + push) : std::max(lo + 1, mid - push);
            }
        }
        widths.push_back(hi - lo);
        const int now = size_at(mid) <= budget ? -1 : 1;
        (now < 0 ? lo : hi) = mid;
        repeats = now == side ? repeats + 1 : 0;
        side = now;
    }

    const bool up_refits = hi + 1 < n && size_at(hi + 1) <= budget;
    const bool down_larger = lo > 0 && size_at(lo - 1) > size_at(lo);
    if (!up_refits && !down_larger) return lo;

    // Non-monotone boundary. Only indices whose higher-fidelity neighbour
    // overshoots qualify; lo always does.
    int first = std::max(0, lo - 3);
    const int last = std::min(n - 1, first + 7);
    first = std::max(0, last - 7);
    int best = lo;
    long long best_size = size_at(lo);
    for (int i = first; i <= last; ++i) {
        const auto s = size_at(i);
        if (s > budget || s < best_size) continue;
        if (i + 1 < n && size_at(i + 1) <= budget) continue;
        if (s > best_size || i > best) {
            best = i;
            best_size = s;
        }
    }
    return best;
}

CompressionOutcome BudgetSearcher::compress(ByteBudget budget) {
    if (budget.target_bytes <= 0) throw CodecError("byte budget must be positive");
    const int before = probes();
    int index = 0;
    try {
        index = search(budget.target_bytes);
    } catch (const BudgetInfeasible& e) {
        throw BudgetInfeasible(to_string(codec_) + ": budget " + std::to_string(budget.target_bytes) +
                               " bytes is infeasible (" + e.what() + ")");
    }

    CompressionOutcome out;
    out.codec = codec_;
    out.budget = budget;
    out.chosen_param = grid_.at(index);
    out.grid_index = index;
    out.payload = payload_at(index);
    out.achieved_bytes = static_cast<long long>(out.payload.size());
    out.probes = probes() - before;
    if (codec_ == CodecId::png_resized) {
        std::tie(out.out_w, out.out_h) =
            png_resized_dims(image_.width(), image_.height(), out.chosen_param.value);
    } else {
        out.out_w = image_.width();
        out.out_h = image_.height();
    }
    return out;
}

CompressionOutcome compress_to_budget(const ImagePlane& image, CodecId codec, ByteBudget budget,
                                      const SearchOptions& options) {
    return BudgetSearcher(image, codec, options).compress(budget);
}

}  // namespace fcb
