#pragma once

#include <vector>

#include "surfflow/core.hpp"

namespace surfflow {

struct QuadratureRule {
    std::vector<Vec2> points;
    std::vector<double> weights;
    int exactness_degree = 0;

    int size() const { return int(points.size()); }
};

namespace detail {

inline void tri_mid(QuadratureRule& r, double w) {
    r.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
    r.weights.push_back(w);
}

// Symmetric orbit of the point (a, a); third barycentric coordinate 1 - 2a.
inline void tri_s3(QuadratureRule& r, double a, double w) {
    r.points.emplace_back(a, a);
    r.points.emplace_back(1.0 - 2.0 * a, a);
    r.points.emplace_back(a, 1.0 - 2.0 * a);
    r.weights.insert(r.weights.end(), 3, w);
}

// Same orbit parameterized by the lone coordinate b = 1 - 2a.
inline void tri_s3b(QuadratureRule& r, double b, double w) {
    tri_s3(r, (1.0 - b) / 2.0, w);
}

// Cyclic (rotational) orbit of (a, b) with c = third coordinate.
inline void tri_r3(QuadratureRule& r, double a, double b, double c, double w) {
    r.points.emplace_back(a, b);
    r.points.emplace_back(c, a);
    r.points.emplace_back(b, c);
    r.weights.insert(r.weights.end(), 3, w);
}

inline void tri_r3(QuadratureRule& r, double a, double b, double w) {
    tri_r3(r, a, b, 1.0 - a - b, w);
}

// Full six-point orbit of (a, b).
inline void tri_s6(QuadratureRule& r, double a, double b, double w) {
    const double c = 1.0 - a - b;
    r.points.emplace_back(a, b);
    r.points.emplace_back(b, a);
    r.points.emplace_back(a, c);
    r.points.emplace_back(c, a);
    r.points.emplace_back(b, c);
    r.points.emplace_back(c, b);
    r.weights.insert(r.weights.end(), 6, w);
}

}  // namespace detail

// Symmetric positive rules on the reference triangle {(0,0),(1,0),(0,1)}.
// Weights are absolute (they sum to the reference area 1/2). A degree-3
// request is served by the degree-4 rule; the classical 4-point degree-3
// rule carries a negative weight.
inline QuadratureRule quadrature_rule(int degree) {
    using namespace detail;
    if (degree < 1 || degree > 12)
        throw UnsupportedDegree("quadrature degree must be in [1, 12], got " + std::to_string(degree));

    QuadratureRule r;
    switch (degree) {
        case 1:
            tri_mid(r, 0.5);
            r.exactness_degree = 1;
            break;
        case 2:
            tri_s3(r, 1.0 / 6.0, 1.0 / 6.0);
            r.exactness_degree = 2;
            break;
        case 3:
        case 4:
            tri_s3(r, 0.091576213509770743460, 0.054975871827660933819);
            tri_s3(r, 0.44594849091596488632, 0.11169079483900573285);
            r.exactness_degree = 4;
            break;
        case 5:
            tri_mid(r, 0.1125);
            tri_s3(r, 0.10128650732345633880, 0.062969590272413576298);
            tri_s3(r, 0.47014206410511508977, 0.066197076394253090369);
            r.exactness_degree = 5;
            break;
        case 6:
            tri_s3(r, 0.063089014491502228340, 0.025422453185103408460);
            tri_s3(r, 0.24928674517091042129, 0.058393137863189683013);
            tri_s6(r, 0.053145049844816947353, 0.31035245103378440542,
                   0.041425537809186787597);
            r.exactness_degree = 6;
            break;
        case 7:
            tri_r3(r, 0.062382265094402118174, 0.067517867073916085443,
                   0.026517028157436251429);
            tri_r3(r, 0.055225456656926611737, 0.32150249385198182267,
                   0.043881408714446055037);
            tri_r3(r, 0.034324302945097146470, 0.66094919618673565761,
                   0.30472650086816719592, 0.028775042784981585738);
            tri_r3(r, 0.51584233435359177926, 0.27771616697639178257,
                   0.20644149867001643817, 0.067493187009802774463);
            r.exactness_degree = 7;
            break;
        case 8:
            tri_mid(r, 0.0721578038388935841255455552445323);
            tri_s3(r, 0.170569307751760206622293501491464,
                   0.0516086852673591251408957751460645);
            tri_s3(r, 0.0505472283170309754584235505965989,
                   0.0162292488115990401554629641708902);
            tri_s3(r, 0.459292588292723156028815514494169,
                   0.0475458171336423123969480521942921);
            tri_s6(r, 0.008394777409957605337213834539296,
                   0.263112829634638113421785786284643,
                   0.0136151570872174971324223450369544);
            r.exactness_degree = 8;
            break;
        case 9:
            tri_mid(r, 0.0485678981413994169096209912536443);
            tri_s3b(r, 0.020634961602524744433,
                    0.0156673501135695352684274156436046);
            tri_s3b(r, 0.12582081701412672546,
                    0.0389137705023871396583696781497019);
            tri_s3(r, 0.188203535619032730240961280467335,
                   0.0398238694636051265164458871320226);
            tri_s3(r, 0.0447295133944527098651065899662763,
                   0.0127888378293490156308393992794999);
            tri_s6(r, 0.0368384120547362836348175987833851,
                   0.2219629891607656956751025276931919,
                   0.0216417696886446886446886446886446);
            r.exactness_degree = 9;
            break;
        case 10:
            tri_mid(r, 0.0454089951913767900476432975500142);
            tri_s3b(r, 0.028844733232685245264984935583748,
                    0.0183629788782333523585030359456832);
            tri_s3(r, 0.109481575485037054795458631340522,
                   0.0226605297177639673913028223692986);
            tri_s6(r, 0.141707219414879954756683250476361,
                   0.307939838764120950165155022930631,
                   0.0363789584227100543021575883096803);
            tri_s6(r, 0.025003534762686386073988481007746,
                   0.246672560639902693917276465411176,
                   0.0141636212655287424183685307910495);
            tri_s6(r, 0.0095408154002994575801528096228873,
                   0.0668032510122002657735402127620247,
                   4.71083348186641172996373548344341e-03);
            r.exactness_degree = 10;
            break;
        case 11:
            tri_s6(r, 0.0, 0.141129718717363295960826061941652,
                   3.68119189165027713212944752369032e-03);
            tri_mid(r, 0.0439886505811161193990465846607278);
            tri_s3(r, 0.0259891409282873952600324854988407,
                   4.37215577686801152475821439991262e-03);
            tri_s3(r, 0.0942875026479224956305697762754049,
                   0.0190407859969674687575121697178070);
            tri_s3b(r, 0.010726449965572372516734795387128,
                    9.42772402806564602923839129555767e-03);
            tri_s3(r, 0.207343382614511333452934024112966,
                   0.0360798487723697630620149942932315);
            tri_s3b(r, 0.122184388599015809877869236727746,
                    0.0346645693527679499208828254519072);
            tri_s6(r, 0.0448416775891304433090523914688007,
                   0.2772206675282791551488214673424523,
                   0.0205281577146442833208261574536469);
            r.exactness_degree = 11;
            break;
        case 12:
            tri_s3b(r, 2.35652204523900e-02, 1.28655332202275e-02);
            tri_s3b(r, 1.20551215411079e-01, 2.18462722690190e-02);
            tri_s3(r, 2.71210385012116e-01, 3.14291121089425e-02);
            tri_s3(r, 1.27576145541586e-01, 1.73980564653545e-02);
            tri_s3(r, 2.13173504532100e-02, 3.08313052577950e-03);
            tri_s6(r, 1.15343494534698e-01, 2.75713269685514e-01,
                   2.01857788831905e-02);
            tri_s6(r, 2.28383322222570e-02, 2.81325580989940e-01,
                   1.11783866011515e-02);
            tri_s6(r, 2.57340505483300e-02, 1.16251915907597e-01,
                   8.65811555432950e-03);
            r.exactness_degree = 12;
            break;
    }
    return r;
}

}  // namespace surfflow
