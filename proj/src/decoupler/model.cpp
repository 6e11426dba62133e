#include "neurons/decoupler/model.hpp"

#include <sstream>

#include "neurons/common/error.hpp"
#include "neurons/common/rng.hpp"
#include "neurons/decoupler/layers.hpp"
#include "neurons/tasks/tokenizer.hpp"

namespace neurons::decoupler {

namespace {

Mat gaussian(Rng& rng, int rows, int cols, double scale) {
    std::normal_distribution<double> n(0.0, scale);
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = n(rng);
    return m;
}

double inv_sqrt(int n) { return 1.0 / std::sqrt(static_cast<double>(n)); }

std::string encode_dims(const DecouplerDims& d) {
    std::ostringstream s;
    s << d.tokens << ',' << d.width << ',' << d.text_tokens << ',' << d.attn << ',' << d.channels
      << ',' << d.seg_size << ',' << d.latent_channels << ',' << d.concepts << ',' << d.vocab
      << ',' << d.text_hidden << ',' << d.frames;
    return s.str();
}

DecouplerDims decode_dims(const std::string& text) {
    DecouplerDims d;
    char c;
    std::istringstream s(text);
    if (!(s >> d.tokens >> c >> d.width >> c >> d.text_tokens >> c >> d.attn >> c >> d.channels >>
          c >> d.seg_size >> c >> d.latent_channels >> c >> d.concepts >> c >> d.vocab >> c >>
          d.text_hidden >> c >> d.frames)) {
        throw IntegrityError("malformed decoupler dims '" + text + "'");
    }
    return d;
}

}  // namespace

Decoupler::Decoupler(const DecouplerDims& d, std::uint64_t seed) : dims_(d) {
    if (d.tokens <= 0 || d.width <= 0 || d.text_tokens <= 0 || d.attn <= 0 || d.channels <= 0 ||
        d.seg_size <= 0 || d.seg_size % 2 != 0 || d.latent_channels <= 0 || d.concepts <= 0 ||
        d.vocab <= tasks::kEosId || d.text_hidden <= 0 || d.frames <= 0) {
        throw ConfigError("decoupler dimensions must be positive (seg_size even)");
    }
    Rng rng = make_rng(seed, "decoupler.init");
    const int c = d.width, e = d.tokens * d.width, pg = d.grid_pixels() * d.channels;
    params_.add("attn.Wq", gaussian(rng, c, d.attn, inv_sqrt(c)));
    params_.add("attn.Wk", gaussian(rng, c, d.attn, inv_sqrt(c)));
    params_.add("attn.Wv", gaussian(rng, c, c, inv_sqrt(c)));
    params_.add("trunk.W", gaussian(rng, e, pg, inv_sqrt(e)));
    params_.add("trunk.b", Mat::Zero(1, pg));
    params_.add("seg.w", gaussian(rng, d.channels, 1, inv_sqrt(d.channels)));
    params_.add("seg.b", Mat::Zero(1, 1));
    params_.add("rec.W", gaussian(rng, d.channels, d.latent_channels, inv_sqrt(d.channels)));
    params_.add("rec.b", Mat::Zero(1, d.latent_channels));
    params_.add("cls.W", gaussian(rng, c, d.concepts, 0.1 * inv_sqrt(c)));
    params_.add("cls.b", Mat::Zero(1, d.concepts));
    const int th = d.text_hidden;
    params_.add("txt.Wp", gaussian(rng, d.text_tokens * c, th, inv_sqrt(d.text_tokens * c)));
    params_.add("txt.bp", Mat::Zero(1, th));
    params_.add("txt.E", gaussian(rng, d.vocab, th, 0.1));
    params_.add("txt.Wh", gaussian(rng, th, th, 0.5 * inv_sqrt(th)));
    params_.add("txt.bh", Mat::Zero(1, th));
    params_.add("txt.Wo", gaussian(rng, th, d.vocab, inv_sqrt(th)));
    params_.add("txt.bo", Mat::Zero(1, d.vocab));
}

Mat Decoupler::pool(const Mat& e_vid) const {
    const int f = dims_.frames, n = dims_.tokens, c = dims_.width;
    require_shape(e_vid.cols() == n * c && e_vid.rows() % f == 0,
                  "video embedding does not match decoupler dims");
    Mat out = Mat::Zero(e_vid.rows() / f, c);
    for (Eigen::Index r = 0; r < e_vid.rows(); ++r)
        for (int t = 0; t < n; ++t) out.row(r / f) += e_vid.block(r, t * c, 1, c);
    return out / static_cast<double>(f * n);
}

Mat Decoupler::classify(const Mat& e_vid) const {
    return (pool(e_vid) * params_["cls.W"]).rowwise() + RowVec(params_["cls.b"]);
}

Mat Decoupler::classify_backward(const Mat& e_vid, const Mat& grad_logits) {
    const int f = dims_.frames, n = dims_.tokens, c = dims_.width;
    params_.grad("cls.W") += pool(e_vid).transpose() * grad_logits;
    params_.grad("cls.b") += grad_logits.colwise().sum();
    const Mat d_pool = grad_logits * params_["cls.W"].transpose() / static_cast<double>(f * n);
    Mat d_vid(e_vid.rows(), e_vid.cols());
    for (Eigen::Index r = 0; r < e_vid.rows(); ++r)
        for (int t = 0; t < n; ++t) d_vid.block(r, t * c, 1, c) = d_pool.row(r / f);
    return d_vid;
}

Mat Decoupler::attend(const Mat& frame_tokens, const Mat& text_tokens) const {
    require_shape(frame_tokens.cols() == dims_.width && text_tokens.cols() == dims_.width,
                  "token width does not match decoupler dims");
    return cross_attend(frame_tokens * params_["attn.Wq"], text_tokens * params_["attn.Wk"],
                        text_tokens * params_["attn.Wv"]);
}

TrunkCache Decoupler::trunk_forward(const Mat& vid_rows, const Mat& txt_rows) const {
    const int n = dims_.tokens, nt = dims_.text_tokens, c = dims_.width;
    require_shape(vid_rows.cols() == n * c, "frame embedding width mismatch");
    require_shape(txt_rows.cols() == nt * c, "text embedding width mismatch");
    require_shape(vid_rows.rows() == txt_rows.rows(), "one text row per frame row expected");
    TrunkCache cache;
    cache.vid = vid_rows;
    cache.txt = txt_rows;
    cache.z.resize(vid_rows.rows(), n * c);
    for (Eigen::Index r = 0; r < vid_rows.rows(); ++r) {
        const Mat x = unflatten_row(vid_rows.row(r), n, c);
        const Mat t = unflatten_row(txt_rows.row(r), nt, c);
        cache.z.row(r) = flatten_row(x + attend(x, t));
    }
    cache.u = (cache.z * params_["trunk.W"]).rowwise() + RowVec(params_["trunk.b"]);
    cache.feat = silu(cache.u);
    return cache;
}

void Decoupler::trunk_backward(const TrunkCache& cache, const Mat& grad_feat, Mat& grad_vid,
                               Mat& grad_txt) {
    const int n = dims_.tokens, nt = dims_.text_tokens, c = dims_.width;
    auto& p = params_;
    const Mat du = grad_feat.cwiseProduct(silu_grad(cache.u));
    p.grad("trunk.W") += cache.z.transpose() * du;
    p.grad("trunk.b") += du.colwise().sum();
    const Mat dz = du * p["trunk.W"].transpose();
    const Mat &wq = p["attn.Wq"], &wk = p["attn.Wk"], &wv = p["attn.Wv"];
    for (Eigen::Index r = 0; r < dz.rows(); ++r) {
        const Mat x = unflatten_row(cache.vid.row(r), n, c);
        const Mat t = unflatten_row(cache.txt.row(r), nt, c);
        const Mat q = x * wq, k = t * wk, v = t * wv;
        const Mat d_out = unflatten_row(dz.row(r), n, c);
        const AttentionGrads g = cross_attend_backward(q, k, v, d_out);
        p.grad("attn.Wq") += x.transpose() * g.dq;
        p.grad("attn.Wk") += t.transpose() * g.dk;
        p.grad("attn.Wv") += t.transpose() * g.dv;
        const Mat dx = d_out + g.dq * wq.transpose();
        const Mat dt = g.dk * wk.transpose() + g.dv * wv.transpose();
        grad_vid.row(r) += flatten_row(dx);
        grad_txt.row(r) += flatten_row(dt);
    }
}

Mat Decoupler::seg_head(const TrunkCache& cache) const {
    const int px = dims_.grid_pixels(), g = dims_.channels;
    const Mat& w = params_["seg.w"];
    const double b = params_["seg.b"](0, 0);
    Mat out(cache.feat.rows(), px);
    for (Eigen::Index r = 0; r < cache.feat.rows(); ++r) {
        const Vec logits = unflatten_row(cache.feat.row(r), px, g) * w;
        for (int i = 0; i < px; ++i) out(r, i) = sigmoid(logits(i) + b);
    }
    return out;
}

Mat Decoupler::seg_head_backward(const TrunkCache& cache, const Mat& grad_prob) {
    const int px = dims_.grid_pixels(), g = dims_.channels;
    const Mat prob = seg_head(cache);
    const Mat d_logit = grad_prob.cwiseProduct(prob.cwiseProduct((1.0 - prob.array()).matrix()));
    const Mat& w = params_["seg.w"];
    Mat d_feat(cache.feat.rows(), cache.feat.cols());
    for (Eigen::Index r = 0; r < cache.feat.rows(); ++r) {
        const Mat f = unflatten_row(cache.feat.row(r), px, g);
        const Vec dl = d_logit.row(r).transpose();
        params_.grad("seg.w") += f.transpose() * dl;
        params_.grad("seg.b")(0, 0) += dl.sum();
        d_feat.row(r) = flatten_row(dl * w.transpose());
    }
    return d_feat;
}

Mat Decoupler::rec_head(const TrunkCache& cache) const {
    const int s = dims_.seg_size, l = dims_.latent_size(), g = dims_.channels;
    Mat out(cache.feat.rows(), dims_.latent_dim());
    for (Eigen::Index r = 0; r < cache.feat.rows(); ++r) {
        const Mat f = unflatten_row(cache.feat.row(r), s * s, g);
        Mat pooled = Mat::Zero(l * l, g);
        for (int y = 0; y < s; ++y)
            for (int x = 0; x < s; ++x) pooled.row((y / 2) * l + x / 2) += 0.25 * f.row(y * s + x);
        const Mat lat = (pooled * params_["rec.W"]).rowwise() + RowVec(params_["rec.b"]);
        out.row(r) = flatten_row(lat);
    }
    return out;
}

Mat Decoupler::rec_head_backward(const TrunkCache& cache, const Mat& grad_latent) {
    const int s = dims_.seg_size, l = dims_.latent_size(), g = dims_.channels;
    const int cl = dims_.latent_channels;
    const Mat& w = params_["rec.W"];
    Mat d_feat(cache.feat.rows(), cache.feat.cols());
    for (Eigen::Index r = 0; r < cache.feat.rows(); ++r) {
        const Mat f = unflatten_row(cache.feat.row(r), s * s, g);
        Mat pooled = Mat::Zero(l * l, g);
        for (int y = 0; y < s; ++y)
            for (int x = 0; x < s; ++x) pooled.row((y / 2) * l + x / 2) += 0.25 * f.row(y * s + x);
        const Mat d_lat = unflatten_row(grad_latent.row(r), l * l, cl);
        params_.grad("rec.W") += pooled.transpose() * d_lat;
        params_.grad("rec.b") += d_lat.colwise().sum();
        const Mat d_pooled = d_lat * w.transpose();
        Mat df(s * s, g);
        for (int y = 0; y < s; ++y)
            for (int x = 0; x < s; ++x) df.row(y * s + x) = 0.25 * d_pooled.row((y / 2) * l + x / 2);
        d_feat.row(r) = flatten_row(df);
    }
    return d_feat;
}

TextCache Decoupler::text_forward(const RowVec& e_txt, const std::vector<int>& tokens) const {
    require_shape(e_txt.size() == dims_.text_tokens * dims_.width, "text embedding width mismatch");
    if (tokens.size() < 2) throw DomainError("empty token sequence");
    const auto& p = params_;
    TextCache cache;
    cache.prefix = e_txt;
    cache.inputs.assign(tokens.begin(), tokens.end() - 1);
    cache.h.push_back(((e_txt * p["txt.Wp"]) + RowVec(p["txt.bp"])).array().tanh().matrix());
    cache.logits.resize(static_cast<Eigen::Index>(cache.inputs.size()), dims_.vocab);
    for (std::size_t i = 0; i < cache.inputs.size(); ++i) {
        const int id = cache.inputs[i];
        if (id < 0 || id >= dims_.vocab) throw DomainError("token id outside the vocabulary");
        const RowVec a = cache.h.back() * p["txt.Wh"] + p["txt.E"].row(id) + RowVec(p["txt.bh"]);
        cache.h.push_back(a.array().tanh().matrix());
        cache.logits.row(static_cast<Eigen::Index>(i)) =
            cache.h.back() * p["txt.Wo"] + RowVec(p["txt.bo"]);
    }
    return cache;
}

RowVec Decoupler::text_backward(const TextCache& cache, const Mat& grad_logits) {
    auto& p = params_;
    const Mat &wo = p["txt.Wo"], &wh = p["txt.Wh"];
    RowVec dh_next = RowVec::Zero(dims_.text_hidden);
    for (std::size_t i = cache.inputs.size(); i-- > 0;) {
        const RowVec& h_out = cache.h[i + 1];
        const RowVec dl = grad_logits.row(static_cast<Eigen::Index>(i));
        p.grad("txt.Wo") += h_out.transpose() * dl;
        p.grad("txt.bo") += dl;
        const RowVec dh = dl * wo.transpose() + dh_next;
        const RowVec da = dh.cwiseProduct((1.0 - h_out.array().square()).matrix());
        p.grad("txt.Wh") += cache.h[i].transpose() * da;
        p.grad("txt.bh") += da;
        p.grad("txt.E").row(cache.inputs[i]) += da;
        dh_next = da * wh.transpose();
    }
    const RowVec d_pre = dh_next.cwiseProduct((1.0 - cache.h[0].array().square()).matrix());
    p.grad("txt.Wp") += cache.prefix.transpose() * d_pre;
    p.grad("txt.bp") += d_pre;
    return d_pre * p["txt.Wp"].transpose();
}

std::vector<int> Decoupler::greedy_decode(const RowVec& e_txt, int max_len,
                                          bool* truncated) const {
    require_shape(e_txt.size() == dims_.text_tokens * dims_.width, "text embedding width mismatch");
    const auto& p = params_;
    RowVec h = ((e_txt * p["txt.Wp"]) + RowVec(p["txt.bp"])).array().tanh().matrix();
    int prev = tasks::kBosId;
    std::vector<int> out;
    if (truncated) *truncated = false;
    while (true) {
        h = (h * p["txt.Wh"] + p["txt.E"].row(prev) + RowVec(p["txt.bh"])).array().tanh().matrix();
        Eigen::Index next;
        (h * p["txt.Wo"] + RowVec(p["txt.bo"])).maxCoeff(&next);
        if (next == tasks::kEosId) break;
        if (static_cast<int>(out.size()) == max_len) {
            if (truncated) *truncated = true;
            break;
        }
        out.push_back(static_cast<int>(next));
        prev = static_cast<int>(next);
    }
    return out;
}

void Decoupler::store(Checkpoint& ckpt) const {
    ckpt.meta["decoupler.dims"] = encode_dims(dims_);
    for (const auto& [name, value] : params_.values()) ckpt.tensors["decoupler." + name] = value;
}

Decoupler Decoupler::restore(const Checkpoint& ckpt) {
    Decoupler d(decode_dims(ckpt.meta_at("decoupler.dims")), 0);
    for (auto& [name, value] : d.params_.values()) {
        const Mat& stored = ckpt.tensor_at("decoupler." + name);
        if (stored.rows() != value.rows() || stored.cols() != value.cols()) {
            throw IntegrityError("checkpoint tensor decoupler." + name + " has the wrong shape");
        }
        value = stored;
    }
    return d;
}

}  // namespace neurons::decoupler
