#pragma once

#define ONFARM_VERSION "0.1.0"
