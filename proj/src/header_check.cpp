// Every public header, included once in one translation unit.
#include "lossgain/acceptance.hpp"
#include "lossgain/analysis.hpp"
#include "lossgain/core/errors.hpp"
#include "lossgain/core/field.hpp"
#include "lossgain/core/matrix.hpp"
#include "lossgain/core/polynomial.hpp"
#include "lossgain/integrators.hpp"
#include "lossgain/io/ini.hpp"
#include "lossgain/io/serialize.hpp"
#include "lossgain/models.hpp"
#include "lossgain/numeric/elliptic.hpp"
#include "lossgain/numeric/linear_solve.hpp"
#include "lossgain/numeric/mat_exp.hpp"
#include "lossgain/numeric/nonsym_eig.hpp"
#include "lossgain/numeric/sym_eig.hpp"
#include "lossgain/registry.hpp"
#include "lossgain/scenario.hpp"
#include "lossgain/system_model.hpp"
#include "lossgain/transforms.hpp"
