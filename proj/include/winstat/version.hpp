#pragma once

#define WINSTAT_VERSION_STRING "0.1.0"
