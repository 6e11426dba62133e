#include "neurons/brain/model.hpp"

#include <sstream>

#include "neurons/common/error.hpp"
#include "neurons/common/rng.hpp"

namespace neurons::brain {

namespace {

Mat gaussian(Rng& rng, int rows, int cols, double scale) {
    std::normal_distribution<double> n(0.0, scale);
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = n(rng);
    return m;
}

std::string block(int k, const char* what) { return "mlp." + std::to_string(k) + "." + what; }

// B x (N*C) <-> (B*N) x C
Mat to_token_rows(const Mat& flat, int tokens, int width) {
    Mat out(flat.rows() * tokens, width);
    for (Eigen::Index b = 0; b < flat.rows(); ++b)
        for (int n = 0; n < tokens; ++n) out.row(b * tokens + n) = flat.block(b, n * width, 1, width);
    return out;
}

Mat from_token_rows(const Mat& rows, int tokens, int width) {
    Mat out(rows.rows() / tokens, tokens * width);
    for (Eigen::Index b = 0; b < out.rows(); ++b)
        for (int n = 0; n < tokens; ++n) out.block(b, n * width, 1, width) = rows.row(b * tokens + n);
    return out;
}

std::string encode_dims(const BrainDims& d) {
    std::ostringstream s;
    s << d.voxels << ',' << d.hidden << ',' << d.mlp_blocks << ',' << d.tokens << ',' << d.width
      << ',' << d.text_tokens << ',' << d.frames;
    return s.str();
}

BrainDims decode_dims(const std::string& text) {
    BrainDims d;
    char sep;
    std::istringstream s(text);
    if (!(s >> d.voxels >> sep >> d.hidden >> sep >> d.mlp_blocks >> sep >> d.tokens >> sep >>
          d.width >> sep >> d.text_tokens >> sep >> d.frames)) {
        throw IntegrityError("malformed brain dims '" + text + "'");
    }
    return d;
}

}  // namespace

Mat EmbeddingBundle::frame_mean() const {
    Mat out = Mat::Zero(batch(), e_vid.cols());
    for (Eigen::Index b = 0; b < batch(); ++b)
        for (int f = 0; f < frames; ++f) out.row(b) += e_vid.row(b * frames + f);
    return out / static_cast<double>(frames);
}

Mat EmbeddingBundle::vid_tokens(Eigen::Index b, int f, int width) const {
    return unflatten_row(e_vid.row(b * frames + f), static_cast<int>(e_vid.cols()) / width, width);
}

Mat ridge_map(const Mat& voxels, const Mat& weight, const RowVec& bias) {
    require_shape(voxels.cols() == weight.rows(), "voxel count does not match ridge map");
    require_shape(bias.size() == weight.cols(), "ridge bias does not match ridge map");
    return (voxels * weight).rowwise() + bias;
}

BrainModel::BrainModel(const BrainDims& dims, std::uint64_t seed) : dims_(dims) {
    if (dims.voxels <= 0 || dims.hidden <= 0 || dims.mlp_blocks < 0 || dims.tokens <= 0 ||
        dims.width <= 0 || dims.text_tokens <= 0 || dims.frames <= 0) {
        throw ConfigError("brain model dimensions must be positive");
    }
    Rng rng = make_rng(seed, "brain.init");
    const int h = dims.hidden, e = dims.image_dim(), c = dims.width;
    params_.add("ridge.W", gaussian(rng, dims.voxels, h, 1.0 / std::sqrt(dims.voxels)));
    params_.add("ridge.b", Mat::Zero(1, h));
    for (int k = 0; k < dims.mlp_blocks; ++k) {
        params_.add(block(k, "W"), gaussian(rng, h, h, 0.5 / std::sqrt(h)));
        params_.add(block(k, "b"), Mat::Zero(1, h));
    }
    params_.add("backbone.W", gaussian(rng, h, e, 1.0 / std::sqrt(h)));
    params_.add("backbone.b", Mat::Zero(1, e));
    params_.add("prior.W1", gaussian(rng, e, h, 1.0 / std::sqrt(e)));
    params_.add("prior.b1", Mat::Zero(1, h));
    params_.add("prior.W2", gaussian(rng, h, e, 0.1 / std::sqrt(h)));
    params_.add("prior.b2", Mat::Zero(1, e));
    Mat motion(dims.frames * c, c);
    for (int f = 0; f < dims.frames; ++f)
        motion.block(f * c, 0, c, c) = Mat::Identity(c, c) + gaussian(rng, c, c, 0.01);
    params_.add("motion.M", motion);
    params_.add("motion.t", Mat::Zero(dims.frames * dims.tokens, c));
    params_.add("text.W", gaussian(rng, e, dims.text_dim(), 1.0 / std::sqrt(e)));
    params_.add("text.b", Mat::Zero(1, dims.text_dim()));
    initialized_ = true;
}

void BrainModel::require_initialized() const {
    if (!initialized_) throw StateError("brain model is not initialized");
}

EmbeddingBundle BrainModel::forward(const Mat& voxels) const {
    return forward_cached(voxels).out;
}

BrainCache BrainModel::forward_cached(const Mat& voxels) const {
    require_initialized();
    require_shape(voxels.cols() == dims_.voxels, "expected " + std::to_string(dims_.voxels) +
                                                     " voxels, got " +
                                                     std::to_string(voxels.cols()));
    const auto& p = params_;
    const int n = dims_.tokens, c = dims_.width, frames = dims_.frames;
    BrainCache cache;
    cache.x = voxels;
    cache.h.push_back(ridge_map(voxels, p["ridge.W"], p["ridge.b"]));
    for (int k = 0; k < dims_.mlp_blocks; ++k) {
        cache.a.push_back((cache.h.back() * p[block(k, "W")]).rowwise() +
                          RowVec(p[block(k, "b")]));
        cache.h.push_back(cache.h.back() + silu(cache.a.back()));
    }
    cache.back = (cache.h.back() * p["backbone.W"]).rowwise() + RowVec(p["backbone.b"]);
    cache.prior_pre = (cache.back * p["prior.W1"]).rowwise() + RowVec(p["prior.b1"]);

    EmbeddingBundle& out = cache.out;
    out.frames = frames;
    out.e_img = cache.back + ((silu(cache.prior_pre) * p["prior.W2"]).rowwise() +
                              RowVec(p["prior.b2"]));

    const Eigen::Index batch = voxels.rows();
    const Mat z = to_token_rows(out.e_img, n, c);
    out.e_vid.resize(batch * frames, n * c);
    const Mat& motion = p["motion.M"];
    const Mat& shift = p["motion.t"];
    for (int f = 0; f < frames; ++f) {
        const Mat y = z * motion.block(f * c, 0, c, c);
        for (Eigen::Index b = 0; b < batch; ++b)
            for (int t = 0; t < n; ++t)
                out.e_vid.block(b * frames + f, t * c, 1, c) =
                    y.row(b * n + t) + shift.row(f * n + t);
    }
    out.e_txt = (out.frame_mean() * p["text.W"]).rowwise() + RowVec(p["text.b"]);
    return cache;
}

void BrainModel::backward(const BrainCache& cache, const Mat& grad_vid, const Mat& grad_txt) {
    require_initialized();
    auto& p = params_;
    const int n = dims_.tokens, c = dims_.width, frames = dims_.frames;
    const EmbeddingBundle& out = cache.out;
    const Eigen::Index batch = out.batch();

    Mat d_vid = grad_vid.size() ? grad_vid : Mat::Zero(out.e_vid.rows(), out.e_vid.cols());
    require_shape(d_vid.rows() == out.e_vid.rows() && d_vid.cols() == out.e_vid.cols(),
                  "video gradient shape mismatch");
    if (grad_txt.size()) {
        require_shape(grad_txt.rows() == out.e_txt.rows() && grad_txt.cols() == out.e_txt.cols(),
                      "text gradient shape mismatch");
        p.grad("text.W") += out.frame_mean().transpose() * grad_txt;
        p.grad("text.b") += grad_txt.colwise().sum();
        const Mat d_mean = grad_txt * p["text.W"].transpose() / static_cast<double>(frames);
        for (Eigen::Index b = 0; b < batch; ++b)
            for (int f = 0; f < frames; ++f) d_vid.row(b * frames + f) += d_mean.row(b);
    }

    const Mat z = to_token_rows(out.e_img, n, c);
    Mat dz = Mat::Zero(z.rows(), c);
    const Mat& motion = p["motion.M"];
    for (int f = 0; f < frames; ++f) {
        Mat dy(batch * n, c);
        for (Eigen::Index b = 0; b < batch; ++b)
            for (int t = 0; t < n; ++t) dy.row(b * n + t) = d_vid.block(b * frames + f, t * c, 1, c);
        p.grad("motion.M").block(f * c, 0, c, c) += z.transpose() * dy;
        for (Eigen::Index b = 0; b < batch; ++b)
            for (int t = 0; t < n; ++t) p.grad("motion.t").row(f * n + t) += dy.row(b * n + t);
        dz += dy * motion.block(f * c, 0, c, c).transpose();
    }
    const Mat d_img = from_token_rows(dz, n, c);

    const Mat act = silu(cache.prior_pre);
    p.grad("prior.W2") += act.transpose() * d_img;
    p.grad("prior.b2") += d_img.colwise().sum();
    const Mat d_pre = (d_img * p["prior.W2"].transpose()).cwiseProduct(silu_grad(cache.prior_pre));
    p.grad("prior.W1") += cache.back.transpose() * d_pre;
    p.grad("prior.b1") += d_pre.colwise().sum();
    const Mat d_back = d_img + d_pre * p["prior.W1"].transpose();

    p.grad("backbone.W") += cache.h.back().transpose() * d_back;
    p.grad("backbone.b") += d_back.colwise().sum();
    Mat dh = d_back * p["backbone.W"].transpose();
    for (int k = dims_.mlp_blocks - 1; k >= 0; --k) {
        const Mat da = dh.cwiseProduct(silu_grad(cache.a[static_cast<std::size_t>(k)]));
        p.grad(block(k, "W")) += cache.h[static_cast<std::size_t>(k)].transpose() * da;
        p.grad(block(k, "b")) += da.colwise().sum();
        dh += da * p[block(k, "W")].transpose();
    }
    p.grad("ridge.W") += cache.x.transpose() * dh;
    p.grad("ridge.b") += dh.colwise().sum();
}

void BrainModel::store(Checkpoint& ckpt) const {
    require_initialized();
    ckpt.meta["brain.dims"] = encode_dims(dims_);
    for (const auto& [name, value] : params_.values()) ckpt.tensors["brain." + name] = value;
}

BrainModel BrainModel::restore(const Checkpoint& ckpt) {
    BrainModel m;
    m.dims_ = decode_dims(ckpt.meta_at("brain.dims"));
    m.params_ = BrainModel(m.dims_, 0).params_;
    for (auto& [name, value] : m.params_.values()) {
        const Mat& stored = ckpt.tensor_at("brain." + name);
        if (stored.rows() != value.rows() || stored.cols() != value.cols()) {
            throw IntegrityError("checkpoint tensor brain." + name + " has the wrong shape");
        }
        value = stored;
    }
    m.initialized_ = true;
    return m;
}

}  // namespace neurons::brain
